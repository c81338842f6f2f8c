from fractions import Fraction
from math import log

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from affinewalk.measures import (
    CyclicDistribution,
    LatticeMeasure,
    NotAProbabilityError,
    StepLaw,
    convolve,
    cyclic_convolve,
    entropy,
    half_tv,
    l2_norm_sq,
    pushforward_scale,
    reduce_mod,
    tv_distance,
)


def test_step_law_normalizes_and_sorts():
    s = StepLaw(((1, 2), (-1, 1), (0, 1)))
    assert s.atoms == ((-1, 1), (0, 1), (1, 2))
    assert s.total == 4
    assert s.prob(1) == Fraction(1, 2)
    assert s.prob(7) == 0
    assert s.min_prob == Fraction(1, 4)
    np.testing.assert_allclose(s.probs, [0.25, 0.25, 0.5])


@pytest.mark.parametrize("atoms", [(), ((0, 1), (0, 2)), ((0, 0), (1, 1))])
def test_step_law_rejects_bad_atoms(atoms):
    with pytest.raises(ValueError):
        StepLaw(atoms)


@pytest.mark.parametrize("offsets", [[0, 2], [1, 3, 5], [0]])
def test_step_law_gcd_condition(offsets):
    with pytest.raises(ValueError, match=r"gcd\(supp mu - supp mu\) = 1"):
        StepLaw.uniform(offsets)


def test_step_law_entropy():
    assert StepLaw.uniform([-1, 0, 1]).entropy() == pytest.approx(log(3))


def test_lattice_measure_merges_and_drops_zeros():
    m = LatticeMeasure([3, 1, 3, 5], [0.25, 0.25, 0.25, 0.0])
    assert m.as_dict() == {1: 0.25, 3: 0.5}
    assert m.mass(2) == 0.0
    assert not m.is_probability
    with pytest.raises(ValueError):
        m.sites[0] = 7


def test_lattice_measure_rejects_bad_input():
    with pytest.raises(ValueError):
        LatticeMeasure([0, 1], [0.5, -0.1])
    with pytest.raises(ValueError):
        LatticeMeasure([0, 1], [0.8, 0.8])


def test_delta_is_convolution_identity():
    m = LatticeMeasure.uniform([-2, 0, 5])
    assert convolve(m, LatticeMeasure.delta(0)).as_dict() == m.as_dict()
    assert convolve(m, LatticeMeasure.delta(4)).as_dict() == m.translate(4).as_dict()


def test_convolve_dense_and_sparse_paths_agree():
    rng = np.random.default_rng(1)
    a = LatticeMeasure(np.arange(40), rng.dirichlet(np.ones(40)))
    b = LatticeMeasure(np.array([0, 10_000, 50_000]), [0.2, 0.3, 0.5])
    dense = convolve(a, LatticeMeasure(np.arange(3), [0.2, 0.3, 0.5]))
    sparse = convolve(a, b)
    assert len(sparse) == 120
    for k, x in enumerate([0, 10_000, 50_000]):
        for y in (0, 17, 39):
            assert sparse.mass(x + y) == pytest.approx(a.mass(y) * b.mass(x))
    assert dense.total == pytest.approx(1.0)


def test_pushforward_scale():
    m = LatticeMeasure([-1, 2], [0.5, 0.5])
    assert pushforward_scale(m, 3).as_dict() == {-3: 0.5, 6: 0.5}
    assert pushforward_scale(m, -2).as_dict() == {-4: 0.5, 2: 0.5}
    with pytest.raises(ValueError):
        pushforward_scale(m, 0)
    with pytest.raises(OverflowError):
        pushforward_scale(m, 1 << 62)


def test_reduce_mod():
    m = LatticeMeasure([-1, 0, 1, 4], [0.25] * 4)
    d = reduce_mod(m, 3)
    np.testing.assert_allclose(d.mass, [0.25, 0.5, 0.25])
    with pytest.raises(NotAProbabilityError):
        reduce_mod(LatticeMeasure([0], [0.5]), 3)


def test_cyclic_distribution_validation():
    with pytest.raises(NotAProbabilityError):
        CyclicDistribution(3, [0.5, 0.5, 0.5])
    with pytest.raises(ValueError):
        CyclicDistribution(3, [0.5, 0.5])
    assert CyclicDistribution.point(4, 5).mass[1] == 1.0


def test_tv_conventions():
    u = CyclicDistribution.uniform(5)
    d = CyclicDistribution.point(5)
    assert tv_distance(d, u) == pytest.approx(2 * (1 - 1 / 5))
    assert half_tv(d, u) == pytest.approx(1 - 1 / 5)
    with pytest.raises(ValueError):
        tv_distance(d, CyclicDistribution.uniform(6))


def test_entropy_and_l2():
    u = CyclicDistribution.uniform(8)
    assert entropy(u) == pytest.approx(log(8))
    assert l2_norm_sq(u) == pytest.approx(1 / 8)
    assert entropy(LatticeMeasure.delta(3)) == 0.0


def test_cauchy_schwarz_tv_vs_l2_on_random_vectors():
    rng = np.random.default_rng(7)
    for q in (2, 5, 31, 100):
        u = CyclicDistribution.uniform(q)
        for _ in range(50):
            p = CyclicDistribution(q, rng.dirichlet(np.full(q, 0.4)))
            lhs = tv_distance(p, u)
            rhs = np.sqrt(q) * np.sqrt(np.sum((p.mass - u.mass) ** 2))
            assert lhs <= rhs + 1e-12


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.integers(-50, 50), min_size=1, max_size=8, unique=True),
    st.lists(st.integers(-50, 50), min_size=1, max_size=8, unique=True),
    st.integers(2, 40),
)
def test_reduction_commutes_with_convolution(xs, ys, q):
    a, b = LatticeMeasure.uniform(xs), LatticeMeasure.uniform(ys)
    lhs = reduce_mod(convolve(a, b), q)
    rhs = cyclic_convolve(reduce_mod(a, q), reduce_mod(b, q))
    np.testing.assert_allclose(lhs.mass, rhs.mass, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=2, max_size=5, unique=True).filter(
    lambda xs: np.gcd.reduce(np.array(xs) - min(xs)) == 1))
def test_render_round_trip(offsets):
    from affinewalk.cli import parse_step_law

    s = StepLaw(tuple((b, i + 1) for i, b in enumerate(offsets)))
    assert parse_step_law(s.render()) == s

"""Both kernel backends against each other and against small oracles."""
import numpy as np
import pytest

from affinewalk import kernels
from affinewalk.hhms import _jlogj_table
from affinewalk.measures import StepLaw
from affinewalk.walk import WalkParams, make_rng, sample_steps, step_digits

from conftest import enumerate_law


def test_backend_selected():
    assert kernels.BACKEND in kernels.available_backends()


@pytest.mark.parametrize("q", [5, 17, 99])
def test_evolve_curve_against_oracle(backend, q):
    atoms = ((-2, 1), (1, 3), (3, 1))
    p = WalkParams(2, StepLaw(atoms))
    curve, dist = backend.evolve_mod_curve(2, p.step.offsets, p.step.probs, q, 6, -1.0)
    assert curve.shape == (7, 2)
    red = np.zeros(q)
    for x, m in enumerate_law(2, atoms, 6).items():
        red[x % q] += float(m)
    np.testing.assert_allclose(dist, red, atol=1e-14)
    assert curve[-1, 0] == pytest.approx(0.5 * np.abs(red - 1 / q).sum(), abs=1e-14)
    assert curve[-1, 1] == pytest.approx(q * np.sum((red - 1 / q) ** 2), abs=1e-12)
    assert curve[0, 0] == pytest.approx(1 - 1 / q)


def test_evolve_curve_stops_early(backend):
    p = WalkParams.model()
    curve, _ = backend.evolve_mod_curve(2, p.step.offsets, p.step.probs, 101, 50, 0.25)
    assert curve[-1, 0] <= 0.25 < curve[-2, 0]


def test_carry_dp_against_enumeration(backend):
    atoms = ((-1, 2), (0, 1), (4, 1))
    p = WalkParams(3, StepLaw(atoms))
    n = 5
    law = enumerate_law(3, atoms, n)
    xs = sorted(law)
    from affinewalk.arith import base_digits

    digs, tops = zip(*(base_digits(x, 3, n) for x in xs))
    lo, hi = p.carry_bounds
    got = backend.carry_dp_log(3, p.step.offsets, p.step.probs,
                               np.array(digs, dtype=np.int64), np.array(tops, dtype=np.int64), lo, hi)
    np.testing.assert_allclose(np.exp(got), [float(law[x]) for x in xs], rtol=1e-12)


def test_carry_dp_backends_agree_on_samples():
    p = WalkParams.model()
    steps = sample_steps(p, 120, 300, make_rng(0))
    d, t = step_digits(steps, 2)
    lo, hi = p.carry_bounds
    out = [mod.carry_dp_log(2, p.step.offsets, p.step.probs, d, t, lo, hi)
           for mod in kernels.available_backends().values()]
    for o in out[1:]:
        np.testing.assert_allclose(o, out[0], rtol=1e-12)
    assert np.all(np.isfinite(out[0]))


def test_hhms_levels_shapes(backend):
    sums, counts, maxj = backend.hhms_levels(10, _jlogj_table(10))
    assert list(counts[1:]) == [2 ** (n - 1) for n in range(1, 11)]
    assert sums[1] == pytest.approx(2 * np.log(2))
    assert list(maxj[1:4]) == [2, 3, 5]

from math import log

import numpy as np
import pytest

from affinewalk.entropy import (
    DegenerateTruncation,
    EntropyEstimate,
    concentration_profile,
    efron_stein_variance,
    entropy_curve,
    rate_exact,
    reference_rate,
    smb_estimate,
    smb_tail,
    truncate_typical,
)
from affinewalk.measures import StepLaw
from affinewalk.walk import WalkParams, evolve_exact

from conftest import enumerate_law


def test_entropy_curve_small_values(model):
    H = entropy_curve(model, 3)
    assert H[0] == 0.0
    assert H[1] == pytest.approx(log(3))
    # nine outcomes, -1 and 1 hit twice
    assert H[2] == pytest.approx(log(9) - 4 / 9 * log(2))


def test_entropy_curve_matches_enumeration():
    atoms = ((-2, 1), (1, 3), (3, 1))
    p = WalkParams(2, StepLaw(atoms))
    H = entropy_curve(p, 6)
    for n in range(7):
        law = enumerate_law(2, atoms, n)
        ref = -sum(float(m) * log(float(m)) for m in law.values())
        assert H[n] == pytest.approx(ref, abs=1e-12)


def test_increment_bounds(model):
    H = entropy_curve(model, 16)
    inc = np.diff(H)
    assert np.all(inc > 0)
    assert np.all(inc <= log(3) + 1e-12)
    # the log a ceiling is only reached once the boundary effects die out
    assert inc[1] > log(2)
    assert np.all(inc[3:] <= log(2) + 1e-12)


def test_binary_case_is_exactly_log2(binary):
    inc, ces = rate_exact(binary, 12)
    assert inc.value == pytest.approx(log(2), abs=1e-12)
    assert ces.value == pytest.approx(log(2), abs=1e-12)
    assert inc.standard_error < 1e-12


def test_entropy_ceiling_binds_for_large_a():
    p = WalkParams(10, StepLaw.uniform([0, 1]))
    H = entropy_curve(p, 6)
    np.testing.assert_allclose(np.diff(H), log(2), atol=1e-12)


def test_rate_exact_model_close_to_published(model):
    inc, ces = rate_exact(model, 20)
    assert inc.method == "exact-increment" and ces.method == "cesaro"
    assert inc.bits == pytest.approx(0.9887658714, abs=1e-3)
    assert ces.bits > inc.bits


def test_rate_exact_needs_n_max():
    with pytest.raises(ValueError):
        rate_exact(WalkParams.model(), 3)


def test_estimate_validation():
    with pytest.raises(ValueError):
        EntropyEstimate(0.5, 0.0, "guess", 1)


def test_smb_binary_has_zero_variance(binary):
    est = smb_estimate(binary, 40, 500, seed=3)
    assert est.value == pytest.approx(log(2), abs=1e-12)
    assert est.standard_error < 1e-12


def test_smb_matches_cesaro_at_n12(model):
    est = smb_estimate(model, 12, 100_000, seed=12)
    H12 = entropy_curve(model, 12)[-1] / 12
    assert abs(est.value - H12) < 3 * est.standard_error


def test_smb_deterministic_by_seed(model):
    a = smb_estimate(model, 30, 5000, seed=1)
    b = smb_estimate(model, 30, 5000, seed=1)
    assert a == b
    assert a != smb_estimate(model, 30, 5000, seed=2)


def test_smb_tail_limits(model, binary):
    assert smb_tail(model, 10, 100.0) == 0.0
    assert smb_tail(binary, 10, 0.05) == 0.0
    assert 0 < smb_tail(model, 10, 0.05) < 1


def test_variance_n1_closed_form():
    p = WalkParams(2, StepLaw(((0, 1), (1, 3))))
    pr = np.array([0.25, 0.75])
    ref = np.dot(pr, np.log(pr) ** 2) - np.dot(pr, np.log(pr)) ** 2
    assert efron_stein_variance(p, 1) == pytest.approx(ref)


def test_variance_zero_for_binary(binary):
    assert efron_stein_variance(binary, 12) == pytest.approx(0.0, abs=1e-20)


def test_concentration_profile_consistent(model):
    rows = concentration_profile(model, [8, 10, 12], [0.1])
    assert [r["n"] for r in rows] == [8, 10, 12]
    for r in rows:
        assert r["var"] == pytest.approx(efron_stein_variance(model, r["n"]))
        assert r["tail[0.1]"] == pytest.approx(smb_tail(model, r["n"], 0.1))


def test_truncate_typical(model):
    t = truncate_typical(model, 14, 0.1)
    assert t.window_ok
    assert t.measure.is_probability
    # strict versus non-strict window: the discarded set sits inside the tail set
    assert t.discarded_mass <= smb_tail(model, 14, 0.1) + 1e-15
    mu = evolve_exact(model, 14)
    assert set(t.measure.sites.tolist()) <= set(mu.sites.tolist())
    keys = set(mu.sites.tolist())
    l1 = sum(abs(mu.mass(k) - t.measure.mass(k)) for k in keys)
    assert l1 == pytest.approx(t.l1_to_base, abs=1e-12)
    assert len(t.measure) <= t.support_bound


def test_truncate_large_window_keeps_everything(model):
    t = truncate_typical(model, 8, 100.0)
    assert t.discarded_mass == 0.0
    assert t.measure.as_dict() == pytest.approx(evolve_exact(model, 8).as_dict())


def test_truncate_degenerate():
    p = WalkParams(2, StepLaw(((0, 1), (1, 2))))
    with pytest.raises(DegenerateTruncation):
        truncate_typical(p, 1, 1e-3)


def test_reference_rate(model):
    ref = reference_rate(model)
    assert ref.method == "hhms-closed-form"
    assert ref.bits == pytest.approx(0.9887658714, abs=1e-8)
    other = reference_rate(WalkParams(3, StepLaw.uniform([0, 1, 2])))
    assert other.method == "exact-increment"
    assert other.value == pytest.approx(log(3), abs=1e-9)

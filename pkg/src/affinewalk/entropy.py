"""Entropy of ``mu_n``, estimators of the entropy rate ``H(a, mu)``, and SMB diagnostics.

Three independent routes to the rate:

* ``exact-increment`` / ``cesaro`` from the exact entropy curve,
* ``smb-monte-carlo``: the sample mean of ``-log mu_n({X_n}) / n`` with the
  point mass evaluated by the carry DP (works for ``n`` in the hundreds),
* ``hhms-closed-form`` for the model case (see :mod:`affinewalk.hhms`).

Constants appearing in the concentration diagnostics (the tail constant and
the variance slope) are *empirical* suprema over the scanned range, not
certified values.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import log

import numpy as np

from .measures import LatticeMeasure
from .walk import DEFAULT_MAX_SITES, WalkParams, _dense_law, _iter_dense, _log_masses_from_digits
from .walk import make_rng, sample_steps, step_digits, support_span

__all__ = [
    "EntropyEstimate",
    "TypicalSetMeasure",
    "DegenerateTruncation",
    "entropy_curve",
    "rate_exact",
    "smb_estimate",
    "smb_tail",
    "efron_stein_variance",
    "concentration_profile",
    "truncate_typical",
    "reference_rate",
]

METHODS = ("exact-increment", "cesaro", "smb-monte-carlo", "hhms-closed-form")


class DegenerateTruncation(ValueError):
    """The typical set is empty for the requested window."""


@dataclass(frozen=True)
class EntropyEstimate:
    value: float
    standard_error: float
    method: str
    n_used: int
    samples: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")

    @property
    def bits(self) -> float:
        return self.value / log(2)

    @property
    def standard_error_bits(self) -> float:
        return self.standard_error / log(2)


def _dense_entropy(dense: np.ndarray) -> float:
    p = dense[dense > 0]
    return float(-np.dot(p, np.log(p)))


@lru_cache(maxsize=2)
def _law(p: WalkParams, n: int):
    """Nonzero masses of ``mu_n`` (order irrelevant for the statistics here)."""
    _, dense = _dense_law(p, n)
    masses = dense[dense > 0]
    masses.flags.writeable = False
    return masses


def entropy_curve(p: WalkParams, n_max: int, max_sites: int = DEFAULT_MAX_SITES) -> np.ndarray:
    """``[H(mu_0), ..., H(mu_{n_max})]`` in nats."""
    return np.array([_dense_entropy(d) for _, _, d in _iter_dense(p, n_max, max_sites)])


def rate_exact(p: WalkParams, n_max: int, max_sites: int = DEFAULT_MAX_SITES):
    """Increment and Cesaro estimates of the entropy rate at ``n_max``.

    The error width is the change between the last two increments; it is a
    heuristic, not a bound. Returns ``(increment, cesaro)``.
    """
    if n_max < 4:
        raise ValueError("n_max must be at least 4")
    H = entropy_curve(p, n_max, max_sites)
    inc = np.diff(H)
    width = abs(inc[-1] - inc[-2])
    return (
        EntropyEstimate(float(inc[-1]), float(width), "exact-increment", n_max),
        EntropyEstimate(float(H[-1] / n_max), float(abs(H[-1] / n_max - inc[-1])), "cesaro", n_max),
    )


def sample_log_masses(p: WalkParams, n: int, samples: int, seed: int, block: int = 4096) -> np.ndarray:
    """``log mu_n({X_n})`` for ``samples`` independent endpoints.

    Draws come in blocks; block ``k`` uses the Philox stream ``(seed, k)`` so
    the values do not depend on how blocks are scheduled.
    """
    out = []
    for k, start in enumerate(range(0, samples, block)):
        size = min(block, samples - start)
        steps = sample_steps(p, n, size, make_rng(seed, k))
        digits, top = step_digits(steps, p.a)
        out.append(_log_masses_from_digits(p, digits, top))
    return np.concatenate(out) if out else np.empty(0)


def smb_estimate(p: WalkParams, n: int, samples: int, seed: int = 0) -> EntropyEstimate:
    """Monte-Carlo entropy rate: mean of ``-log mu_n({X_n}) / n``."""
    if n < 1 or samples < 1:
        raise ValueError("need n >= 1 and samples >= 1")
    z = -sample_log_masses(p, n, samples, seed) / n
    if not np.all(np.isfinite(z)):
        raise RuntimeError("sampled endpoint outside the support (carry DP bug)")
    se = float(z.std(ddof=1) / np.sqrt(samples)) if samples > 1 else float("nan")
    return EntropyEstimate(float(z.mean()), se, "smb-monte-carlo", n, samples)


def _tail(masses: np.ndarray, n: int, alpha: float) -> float:
    logm = np.log(masses)
    H = -float(np.dot(masses, logm))
    return float(masses[np.abs(-logm - H) >= alpha * n].sum())


def smb_tail(p: WalkParams, n: int, alpha: float) -> float:
    """``mu_n({x : |-log mu_n(x) - H(mu_n)| >= alpha n})``, exactly."""
    return _tail(_law(p, n), n, alpha)


def _variance(masses: np.ndarray) -> float:
    # shifted by the first atom: exact zero when every atom has the same mass
    d = np.log(masses) - np.log(masses[0])
    m1 = float(np.dot(masses, d)) / float(masses.sum())
    return max(0.0, float(np.dot(masses, d * d)) / float(masses.sum()) - m1 * m1)


def efron_stein_variance(p: WalkParams, n: int) -> float:
    """``Var[log mu_n({X_n})]`` computed from the exact law."""
    return _variance(_law(p, n))


def concentration_profile(p: WalkParams, n_values, alphas) -> list:
    """Rows ``{n, H, var, var_over_n, tail[alpha], tail_scaled[alpha]}`` in one pass.

    ``tail_scaled = tail * alpha**2 * n`` is the quantity the SMB bound keeps
    below a constant.
    """
    wanted = sorted(set(int(n) for n in n_values))
    rows = []
    for n, _, dense in _iter_dense(p, wanted[-1]):
        if n not in wanted:
            continue
        masses = dense[dense > 0]
        var = _variance(masses)
        row = {"n": n, "H": _dense_entropy(dense), "var": var, "var_over_n": var / n if n else 0.0}
        for al in alphas:
            t = _tail(masses, n, al)
            row[f"tail[{al}]"] = t
            row[f"tail_scaled[{al}]"] = t * al * al * n
        rows.append(row)
    return rows


@dataclass(frozen=True)
class TypicalSetMeasure:
    """``mu_n`` conditioned on the typical set ``S`` of window ``alpha n``."""

    n: int
    alpha: float
    measure: LatticeMeasure
    discarded_mass: float
    entropy: float
    support_bound: float
    window_ok: bool

    @property
    def l1_to_base(self) -> float:
        """``||mu_n - nu_n|| = 2 mu_n(S^c)``."""
        return 2.0 * self.discarded_mass


def truncate_typical(p: WalkParams, n: int, alpha: float) -> TypicalSetMeasure:
    """Condition ``mu_n`` on ``S = {x : |-log mu_n(x) - H(mu_n)| <= alpha n}``."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    start, dense = _dense_law(p, n)
    nz = np.flatnonzero(dense)
    masses = dense[nz]
    logm = np.log(masses)
    H = -float(np.dot(masses, logm))
    keep = np.abs(-logm - H) <= alpha * n
    if not keep.any():
        raise DegenerateTruncation(f"typical set empty for n={n}, alpha={alpha}")
    kept = masses[keep]
    inside = float(kept.sum())
    discarded = float(masses[~keep].sum())
    nu = LatticeMeasure(nz[keep].astype(np.int64) + start, kept / inside, _trusted=True)
    # every retained atom lies in exp(-H +- alpha n) before renormalising
    window_ok = bool(np.all(np.abs(np.log(kept) + H) <= alpha * n * (1 + 1e-12) + 1e-12))
    with np.errstate(over="ignore"):
        bound = float(np.exp(H + alpha * n) / max(1.0 - discarded, 1e-300))
    return TypicalSetMeasure(
        n=n,
        alpha=alpha,
        measure=nu,
        discarded_mass=discarded,
        entropy=H,
        support_bound=bound,
        window_ok=window_ok,
    )


@lru_cache(maxsize=16)
def reference_rate(p: WalkParams, max_sites: int = 1 << 23) -> EntropyEstimate:
    """Best available ``H(a, mu)``: the closed form in the model case, else an exact increment."""
    if p.is_model_case:
        from .hhms import entropy_ratio

        return EntropyEstimate(entropy_ratio(24) * log(2), 1e-9, "hhms-closed-form", 24)
    n = 4
    while support_span(p, n + 1) <= max_sites:
        n += 1
    return rate_exact(p, n, max_sites)[0]

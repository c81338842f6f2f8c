"""Exact and modular evolution of ``X_{n+1} = a X_n + b_n`` with ``X_0 = 0``.

``mu_n`` is the law of ``sum_{i<n} b_i a**i``. Random draws go through a
Philox counter-based generator keyed by a :class:`numpy.random.SeedSequence`,
so a ``(seed, block)`` pair reproduces the same stream on every platform.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import gcd

import numpy as np

from . import kernels
from .arith import base_digits
from .measures import CyclicDistribution, ExactLatticeMeasure, LatticeMeasure, StepLaw

__all__ = [
    "WalkParams",
    "CapExceeded",
    "NonCoprimeModulusWarning",
    "DEFAULT_MAX_SITES",
    "support_span",
    "evolve_exact",
    "evolve_mod",
    "point_mass",
    "log_point_mass",
    "sample_endpoint",
    "sample_steps",
    "step_digits",
    "make_rng",
]

# ~1.2 GB per dense float64 law; admits n = 26 for a=2, u{-1,0,1}
DEFAULT_MAX_SITES = 150_000_000
EXACT_MAX_SITES = 100_000


class CapExceeded(RuntimeError):
    """The requested computation is beyond the configured size cap."""


class NonCoprimeModulusWarning(UserWarning):
    pass


@dataclass(frozen=True)
class WalkParams:
    a: int
    step: StepLaw

    def __post_init__(self):
        if int(self.a) < 2:
            raise ValueError(f"multiplier a must be >= 2, got {self.a}")
        object.__setattr__(self, "a", int(self.a))

    @classmethod
    def model(cls) -> "WalkParams":
        """``a = 2`` with steps uniform on ``{-1, 0, 1}``."""
        return cls(2, StepLaw.uniform([-1, 0, 1]))

    @property
    def is_model_case(self) -> bool:
        return self.a == 2 and self.step == StepLaw.uniform([-1, 0, 1])

    @property
    def carry_bounds(self):
        """Inclusive carry window ``[lo, hi]`` closed under the digit DP.

        With floor-convention digits ``d`` in ``[0, a-1]`` the update is
        ``c' = (c + d - b) / a``; the window below is the smallest integer
        interval containing 0 that this map cannot leave.
        """
        offs = self.step.offsets
        lo = min(0, (-int(offs[-1])) // (self.a - 1))
        hi = max(0, -(-(self.a - 1 - int(offs[0])) // (self.a - 1)))
        return lo, hi


def support_span(p: WalkParams, n: int) -> int:
    offs = p.step.offsets
    return int(offs[-1] - offs[0]) * (p.a**n - 1) // (p.a - 1) + 1


def _iter_dense(p: WalkParams, n_max: int, max_sites: int = DEFAULT_MAX_SITES):
    """Yield ``(n, start, dense)`` for ``n = 0..n_max``.

    ``dense[k]`` is ``mu_n(start + k)``. Adds the top digit each step:
    ``mu_n = mu_{n-1} * (m_{a^{n-1}})_* mu``.
    """
    if support_span(p, n_max) > max_sites:
        raise CapExceeded(
            f"mu_{n_max} spans {support_span(p, n_max)} sites (> cap {max_sites})"
        )
    offs, probs = p.step.offsets, p.step.probs
    bmin = int(offs[0])
    start, dense, scale = 0, np.ones(1), 1
    yield 0, start, dense
    for n in range(1, n_max + 1):
        L = dense.size
        new = np.zeros(L + int(offs[-1] - bmin) * scale)
        for b, w in zip(offs, probs):
            k = int(b - bmin) * scale
            new[k:k + L] += w * dense
        start += bmin * scale
        dense = new
        scale *= p.a
        yield n, start, dense


def _dense_law(p: WalkParams, n: int, max_sites: int = DEFAULT_MAX_SITES):
    for k, start, dense in _iter_dense(p, n, max_sites):
        if k == n:
            return start, dense


def _exact_counts(p: WalkParams, n: int, max_sites: int) -> ExactLatticeMeasure:
    if support_span(p, n) > max_sites:
        raise CapExceeded(f"exact mode limited to {max_sites} sites")
    offs, weights = p.step.offsets, p.step.weights
    bmin = int(offs[0])
    start, counts, scale = 0, [1], 1
    for _ in range(n):
        new = [0] * (len(counts) + int(offs[-1] - bmin) * scale)
        for b, w in zip(offs, weights):
            k = int(b - bmin) * scale
            for i, c in enumerate(counts):
                if c:
                    new[k + i] += w * c
        start += bmin * scale
        counts = new
        scale *= p.a
    nz = [(start + i, c) for i, c in enumerate(counts) if c]
    return ExactLatticeMeasure(
        tuple(s for s, _ in nz), tuple(c for _, c in nz), p.step.total**n
    )


def evolve_exact(p: WalkParams, n: int, *, exact: bool = False, max_sites: int | None = None):
    """Law ``mu_n`` on Z.

    With ``exact=True`` the masses are rational (integer counts over
    ``total**n``); that mode is capped at ``EXACT_MAX_SITES`` sites.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if exact:
        return _exact_counts(p, n, max_sites or EXACT_MAX_SITES)
    start, dense = _dense_law(p, n, max_sites or DEFAULT_MAX_SITES)
    return LatticeMeasure.from_dense(start, dense)


def evolve_mod(p: WalkParams, q: int, n: int) -> CyclicDistribution:
    """Law of ``X_n mod q`` by forward pushes ``x -> a x + b``; cost ``O(n q |supp|)``."""
    if q < 1:
        raise ValueError("modulus must be positive")
    if gcd(p.a, q) != 1:
        warnings.warn(
            f"gcd(a={p.a}, q={q}) != 1; the mixing theory assumes coprime moduli",
            NonCoprimeModulusWarning,
            stacklevel=2,
        )
    _, dist = kernels.evolve_mod_curve(p.a, p.step.offsets, p.step.probs, q, n, -1.0)
    return CyclicDistribution(q, dist / dist.sum())


def step_digits(steps: np.ndarray, a: int):
    """Digits of ``x = sum_i steps[:, i] a**i`` without forming ``x``.

    Returns ``(digits, top)`` in the floor convention of :func:`arith.base_digits`.
    """
    steps = np.asarray(steps, dtype=np.int64)
    digits = np.empty_like(steps)
    carry = np.zeros(steps.shape[0], dtype=np.int64)
    for i in range(steps.shape[1]):
        t = steps[:, i] + carry
        d = t % a
        digits[:, i] = d
        carry = (t - d) // a
    return digits, carry


def _log_masses_from_digits(p: WalkParams, digits, top) -> np.ndarray:
    lo, hi = p.carry_bounds
    return kernels.carry_dp_log(
        p.a, p.step.offsets, p.step.probs, np.ascontiguousarray(digits, dtype=np.int64),
        np.ascontiguousarray(top, dtype=np.int64), lo, hi,
    )


def log_point_mass(p: WalkParams, n: int, x: int) -> float:
    """``log mu_n({x})`` (``-inf`` off the support) via the carry DP."""
    digits, top = base_digits(int(x), p.a, n)
    lo, hi = p.carry_bounds
    if not lo <= -top <= hi:
        return float("-inf")
    arr = np.array([digits], dtype=np.int64).reshape(1, n)
    return float(_log_masses_from_digits(p, arr, np.array([top]))[0])


def point_mass(p: WalkParams, n: int, x: int) -> float:
    """``mu_n({x}) = P(sum_{i<n} b_i a**i = x)`` in ``O(n |supp|)`` time."""
    return float(np.exp(log_point_mass(p, n, x)))


def make_rng(seed: int, block: int | None = None) -> np.random.Generator:
    ss = np.random.SeedSequence(seed) if block is None else np.random.SeedSequence(seed, spawn_key=(block,))
    return np.random.Generator(np.random.Philox(ss))


def sample_steps(p: WalkParams, n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` independent step sequences ``b_0..b_{n-1}``, shape ``(size, n)``."""
    idx = rng.choice(len(p.step.atoms), size=(size, n), p=p.step.probs)
    return p.step.offsets[idx]


def sample_endpoint(p: WalkParams, n: int, seed: int) -> int:
    """One draw of ``X_n``; identical for identical ``(seed, n)``."""
    steps = sample_steps(p, n, 1, make_rng(seed))[0]
    return sum(int(b) * p.a**i for i, b in enumerate(steps))

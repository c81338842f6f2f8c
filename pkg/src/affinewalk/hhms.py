"""Closed-form entropy rate for ``a = 2`` and steps uniform on ``{-1, 0, 1}``.

The rate is ``H = log 3 - (3/2) L(1/3)`` in nats, where

    L(z) = (1 - 3z)^2 sum_{n>=1} z^n sum_{i<j, gcd=1, e(i,j)=n} j log j

and ``e(i, j)`` counts subtractive Euclid steps. Two conventions matter and
both were fixed against the published value ``H / log 2 = 0.98876587...``:

* ``e`` stops at ``(1, 1)``, so ``e(1, 2) = 1`` and level ``n`` holds
  ``2**(n-1)`` pairs (stopping at a zero entry shifts every level by one and
  multiplies ``L(1/3)`` by 3);
* every logarithm is natural; the ratio to ``log 2`` is taken at the end.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd, log

import numpy as np

from . import kernels

__all__ = [
    "LevelSum",
    "euclid_subtractions",
    "level_pairs",
    "enumerate_level",
    "enumerate_levels",
    "L_at_one_third",
    "entropy_ratio",
    "mixing_constant",
    "PUBLISHED_RATIO",
    "MAX_LEVELS",
]

PUBLISHED_RATIO = 0.9887658714
MAX_LEVELS = 40
_TABLE_MAX = 1 << 25


@dataclass(frozen=True)
class LevelSum:
    level: int
    pair_count: int
    a_n: float
    max_j: int


def euclid_subtractions(i: int, j: int) -> int:
    """Subtractive Euclid steps taking coprime ``(i, j)`` to ``(1, 1)``.

    Runs of equal subtractions are taken in one ``divmod``, so the cost is
    logarithmic rather than linear in the count.
    """
    if i < 1 or j < 1:
        raise ValueError("entries must be positive")
    if gcd(i, j) != 1:
        raise ValueError(f"gcd({i}, {j}) != 1")
    count = 0
    while i != j:
        if i < j:
            i, j = j, i
        k, r = divmod(i, j)
        if r == 0:
            # (j*k, j) with j == 1: stop at (1, 1)
            return count + k - 1
        count += k
        i = r
    return count


def level_pairs(n: int):
    """Yield every coprime ``i < j`` with ``e(i, j) = n`` (small ``n`` only)."""
    stack = [(1, 2, 1)]
    while stack:
        i, j, d = stack.pop()
        if d == n:
            yield i, j
        else:
            stack.append((j, i + j, d + 1))
            stack.append((i, i + j, d + 1))


def _jlogj_table(n_max: int) -> np.ndarray:
    # largest j at level n is F_{n+2}
    f0, f1 = 1, 2
    for _ in range(n_max - 1):
        f0, f1 = f1, f0 + f1
    size = min(f1 + 1, _TABLE_MAX)
    m = np.arange(size, dtype=float)
    m[0] = 1.0
    out = m * np.log(m)
    out[0] = 0.0
    return out


def enumerate_levels(n_max: int, *, backend=None) -> list:
    """``LevelSum`` for levels ``1..n_max`` from one depth-first walk."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if n_max > MAX_LEVELS:
        raise ValueError(f"n_max={n_max} above cap {MAX_LEVELS}")
    impl = backend or kernels
    sums, counts, maxj = impl.hhms_levels(n_max, _jlogj_table(n_max))
    return [LevelSum(n, int(counts[n]), float(sums[n]), int(maxj[n])) for n in range(1, n_max + 1)]


def enumerate_level(n: int) -> LevelSum:
    return enumerate_levels(n)[-1]


def _series(levels):
    a = [0.0, 0.0] + [lv.a_n for lv in levels]
    return [(a[k] - 6 * a[k - 1] + 9 * a[k - 2]) / 3.0 ** (k - 1) for k in range(2, len(a))]


def L_at_one_third(n_max: int, levels=None):
    """Partial sum of ``L(1/3)`` through level ``n_max`` and a remainder indicator.

    ``L(1/3) = sum_n b_n 3**-n`` with ``b_n = a_n - 6 a_{n-1} + 9 a_{n-2}``,
    the coefficients of ``(1 - 3z)^2 sum a_n z^n``. The indicator is the sum
    of the magnitudes of the last three terms.
    """
    if n_max < 4:
        raise ValueError("n_max must be >= 4")
    levels = levels or enumerate_levels(n_max)
    terms = _series(levels)
    return float(np.sum(terms)), float(np.sum(np.abs(terms[-3:])))


def series_terms(n_max: int, levels=None) -> list:
    """``b_n 3**-n`` for ``n = 1..n_max``."""
    return _series(levels or enumerate_levels(n_max))


def entropy_ratio(n_max: int = 32, levels=None) -> float:
    """``H / log 2`` with ``H = log 3 - (3/2) L(1/3)`` (natural logs)."""
    L, _ = L_at_one_third(n_max, levels)
    return (log(3) - 1.5 * L) / log(2)


def mixing_constant(ratio: float) -> float:
    """Cutoff constant in ``log_2 q`` units: ``1 / (H / log 2)``."""
    return 1.0 / ratio

"""Finitely supported measures on Z and on Z/qZ.

Two containers: :class:`LatticeMeasure` (sparse, on the integers) and
:class:`CyclicDistribution` (dense probability vector modulo ``q``). The step
distribution of the walk is a :class:`StepLaw` with exact integer weights.

All distances use the un-halved l1 norm ``||p - r|| = sum |p - r|`` (maximum
2); :func:`half_tv` gives the halved total-variation convention.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import gcd, log
from typing import Iterable, Mapping, Union

import numpy as np

__all__ = [
    "StepLaw",
    "LatticeMeasure",
    "ExactLatticeMeasure",
    "CyclicDistribution",
    "convolve",
    "pushforward_scale",
    "reduce_mod",
    "cyclic_convolve",
    "entropy",
    "l2_norm_sq",
    "tv_distance",
    "half_tv",
    "NotAProbabilityError",
]

PROB_TOL = 1e-12
CYCLIC_TOL = 1e-10
_SITE_LIMIT = 1 << 62
_DENSE_LIMIT = 1 << 26


class NotAProbabilityError(ValueError):
    """Raised when an operation needs a probability measure and gets none."""


def _readonly(arr):
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class StepLaw:
    """Finitely supported step distribution with integer weights.

    ``P(b) = weight(b) / total``. The offsets must not lie in a coset of a
    proper subgroup of Z, i.e. ``gcd(supp - supp) == 1``.

    Examples
    --------
    >>> StepLaw.uniform([-1, 0, 1]).probs
    array([0.33333333, 0.33333333, 0.33333333])
    """

    atoms: tuple

    def __post_init__(self):
        atoms = tuple(sorted((int(b), int(w)) for b, w in self.atoms))
        if not atoms:
            raise ValueError("step law needs at least one atom")
        offs = [b for b, _ in atoms]
        if len(set(offs)) != len(offs):
            raise ValueError(f"duplicate offsets in step law: {offs}")
        if any(w < 1 for _, w in atoms):
            raise ValueError("step weights must be positive integers")
        g = reduce(gcd, (b - offs[0] for b in offs), 0)
        if g != 1:
            raise ValueError(
                f"step support {offs} violates gcd(supp mu - supp mu) = 1 (gcd is {g})"
            )
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def uniform(cls, offsets: Iterable[int]) -> "StepLaw":
        return cls(tuple((b, 1) for b in offsets))

    @classmethod
    def from_mapping(cls, weights: Mapping[int, int]) -> "StepLaw":
        return cls(tuple(weights.items()))

    @property
    def offsets(self) -> np.ndarray:
        return np.array([b for b, _ in self.atoms], dtype=np.int64)

    @property
    def weights(self) -> tuple:
        return tuple(w for _, w in self.atoms)

    @property
    def total(self) -> int:
        return sum(self.weights)

    @property
    def probs(self) -> np.ndarray:
        return np.array(self.weights, dtype=float) / self.total

    def prob(self, b: int) -> Fraction:
        return Fraction(dict(self.atoms).get(int(b), 0), self.total)

    @property
    def min_prob(self) -> Fraction:
        """Smallest atom probability (the constant ``c`` of the variance lemma)."""
        return Fraction(min(self.weights), self.total)

    @property
    def max_abs(self) -> int:
        return max(abs(b) for b, _ in self.atoms)

    @property
    def mean_abs(self) -> float:
        return float(np.dot(np.abs(self.offsets), self.probs))

    def entropy(self) -> float:
        p = self.probs
        return float(-(p * np.log(p)).sum())

    def to_measure(self) -> "LatticeMeasure":
        return LatticeMeasure(self.offsets, self.probs)

    def render(self) -> str:
        return ",".join(f"{b}:{w}" for b, w in self.atoms)

    def __str__(self):
        return self.render()


class LatticeMeasure:
    """Sparse nonnegative measure on Z, stored as sorted sites and masses.

    Zero masses are dropped so that ``sites`` is exactly the support.
    """

    __slots__ = ("sites", "masses", "total")

    def __init__(self, sites, masses, *, _trusted=False):
        sites = np.asarray(sites, dtype=np.int64)
        masses = np.asarray(masses, dtype=float)
        if sites.shape != masses.shape or sites.ndim != 1:
            raise ValueError("sites and masses must be 1-d arrays of equal length")
        if not _trusted:
            if masses.size and masses.min() < 0:
                raise ValueError("masses must be nonnegative")
            order = np.argsort(sites, kind="stable")
            sites, masses = sites[order], masses[order]
            if sites.size and np.any(np.diff(sites) == 0):
                sites, inv = np.unique(sites, return_inverse=True)
                masses = np.bincount(inv, weights=masses)
        keep = masses > 0
        if not keep.all():
            sites, masses = sites[keep], masses[keep]
        self.sites = _readonly(sites)
        self.masses = _readonly(masses)
        self.total = float(np.sum(masses))
        if self.total > 1 + PROB_TOL:
            raise ValueError(f"total mass {self.total} exceeds 1")

    @classmethod
    def delta(cls, x: int = 0) -> "LatticeMeasure":
        return cls([x], [1.0], _trusted=True)

    @classmethod
    def uniform(cls, sites: Iterable[int]) -> "LatticeMeasure":
        sites = list(sites)
        return cls(sites, np.full(len(sites), 1.0 / len(sites)))

    @classmethod
    def from_dict(cls, d: Mapping[int, float]) -> "LatticeMeasure":
        return cls(list(d.keys()), list(d.values()))

    @classmethod
    def from_dense(cls, start: int, dense) -> "LatticeMeasure":
        dense = np.asarray(dense, dtype=float)
        nz = np.flatnonzero(dense)
        return cls(nz.astype(np.int64) + start, dense[nz], _trusted=True)

    def __len__(self):
        return self.sites.size

    def __repr__(self):
        return f"LatticeMeasure(n_atoms={len(self)}, total={self.total:.12g})"

    @property
    def support(self) -> np.ndarray:
        return self.sites

    @property
    def is_probability(self) -> bool:
        return abs(self.total - 1.0) <= PROB_TOL

    def mass(self, x: int) -> float:
        i = np.searchsorted(self.sites, x)
        if i < self.sites.size and self.sites[i] == x:
            return float(self.masses[i])
        return 0.0

    def as_dict(self) -> dict:
        return {int(s): float(m) for s, m in zip(self.sites, self.masses)}

    def translate(self, t: int) -> "LatticeMeasure":
        return LatticeMeasure(self.sites + int(t), self.masses, _trusted=True)

    def span(self) -> int:
        return int(self.sites[-1] - self.sites[0]) + 1 if self.sites.size else 0

    def dense(self):
        """``(start, array)`` over the support interval."""
        out = np.zeros(self.span())
        out[self.sites - self.sites[0]] = self.masses
        return int(self.sites[0]), out


@dataclass(frozen=True)
class ExactLatticeMeasure:
    """Rational measure ``counts[k] / denominator`` at ``sites[k]``.

    Counts are Python integers so nothing overflows; meant for oracle sizes.
    """

    sites: tuple
    counts: tuple
    denominator: int

    def mass(self, x: int) -> Fraction:
        try:
            k = self.sites.index(x)
        except ValueError:
            return Fraction(0)
        return Fraction(self.counts[k], self.denominator)

    def as_fractions(self) -> dict:
        return {s: Fraction(c, self.denominator) for s, c in zip(self.sites, self.counts)}

    def to_float(self) -> LatticeMeasure:
        return LatticeMeasure(
            np.array(self.sites, dtype=np.int64),
            np.array([c / self.denominator for c in self.counts]),
        )


@dataclass(frozen=True)
class CyclicDistribution:
    """Probability vector on Z/qZ."""

    q: int
    mass: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.mass, dtype=float)
        if self.q < 1 or m.shape != (self.q,):
            raise ValueError(f"expected {self.q} masses, got shape {m.shape}")
        if m.min() < -CYCLIC_TOL:
            raise ValueError("negative mass in cyclic distribution")
        if abs(m.sum() - 1.0) > CYCLIC_TOL:
            raise NotAProbabilityError(f"cyclic masses sum to {m.sum()!r}, not 1")
        object.__setattr__(self, "mass", _readonly(np.clip(m, 0.0, None)))

    @classmethod
    def uniform(cls, q: int) -> "CyclicDistribution":
        return cls(q, np.full(q, 1.0 / q))

    @classmethod
    def point(cls, q: int, x: int = 0) -> "CyclicDistribution":
        m = np.zeros(q)
        m[x % q] = 1.0
        return cls(q, m)

    def __eq__(self, other):
        return (
            isinstance(other, CyclicDistribution)
            and self.q == other.q
            and np.array_equal(self.mass, other.mass)
        )

    __hash__ = None


Measure = Union[LatticeMeasure, CyclicDistribution, ExactLatticeMeasure]


def _masses(m) -> np.ndarray:
    if isinstance(m, LatticeMeasure):
        return m.masses
    if isinstance(m, CyclicDistribution):
        return m.mass
    if isinstance(m, ExactLatticeMeasure):
        return m.to_float().masses
    return np.asarray(m, dtype=float)


def convolve(m1: LatticeMeasure, m2: LatticeMeasure) -> LatticeMeasure:
    """Additive convolution ``(m1 * m2)(x) = sum_y m1(y) m2(x - y)``."""
    if len(m1) == 0 or len(m2) == 0:
        return LatticeMeasure([], [], _trusted=True)
    if len(m1) < len(m2):
        m1, m2 = m2, m1
    span = m1.span() + m2.span() - 1
    if span <= _DENSE_LIMIT and m1.span() * m2.span() <= 4 * len(m1) * len(m2):
        s1, d1 = m1.dense()
        s2, d2 = m2.dense()
        out = np.convolve(d1, d2)
        np.clip(out, 0.0, None, out=out)
        return LatticeMeasure.from_dense(s1 + s2, out)
    # sparse: one shifted copy of m1 per atom of m2, merged by site
    sites = (m1.sites[None, :] + m2.sites[:, None]).ravel()
    masses = (m1.masses[None, :] * m2.masses[:, None]).ravel()
    return LatticeMeasure(sites, masses)


def pushforward_scale(m: LatticeMeasure, k: int) -> LatticeMeasure:
    """Image of ``m`` under ``x -> k x``."""
    k = int(k)
    if k == 0:
        raise ValueError("scale factor must be nonzero")
    if len(m) and max(abs(int(m.sites[0])), abs(int(m.sites[-1]))) * abs(k) >= _SITE_LIMIT:
        raise OverflowError("scaled sites exceed the int64 range")
    sites, masses = m.sites * k, m.masses
    if k < 0:
        sites, masses = sites[::-1], masses[::-1]
    return LatticeMeasure(sites.copy(), masses.copy(), _trusted=True)


def reduce_mod(m: LatticeMeasure, q: int) -> CyclicDistribution:
    """``(m mod q)(x) = m(x + qZ)``; ``m`` must be a probability measure."""
    if q < 1:
        raise ValueError("modulus must be positive")
    if not m.is_probability:
        raise NotAProbabilityError(f"reduce_mod needs total mass 1, got {m.total!r}")
    out = np.bincount(m.sites % q, weights=m.masses, minlength=q)
    return CyclicDistribution(q, out / out.sum())


def cyclic_convolve(p: CyclicDistribution, r: CyclicDistribution) -> CyclicDistribution:
    if p.q != r.q:
        raise ValueError("moduli differ")
    out = np.real(np.fft.ifft(np.fft.fft(p.mass) * np.fft.fft(r.mass)))
    out = np.clip(out, 0.0, None)
    return CyclicDistribution(p.q, out / out.sum())


def entropy(m) -> float:
    """Shannon entropy in nats, with ``0 log 0 = 0``."""
    p = _masses(m)
    p = p[p > 0]
    return float(-np.dot(p, np.log(p)))


def l2_norm_sq(m) -> float:
    p = _masses(m)
    return float(np.dot(p, p))


def tv_distance(p: CyclicDistribution, r: CyclicDistribution) -> float:
    """Un-halved distance ``sum_x |p(x) - r(x)|`` in ``[0, 2]``."""
    if p.q != r.q:
        raise ValueError(f"modulus mismatch: {p.q} vs {r.q}")
    return float(np.abs(p.mass - r.mass).sum())


def half_tv(p: CyclicDistribution, r: CyclicDistribution) -> float:
    return 0.5 * tv_distance(p, r)


def bits(nats: float) -> float:
    return nats / log(2)

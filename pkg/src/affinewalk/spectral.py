"""Fourier side of the walk.

Conventions: ``mu^(xi) = sum_x mu(x) e(-xi x)`` with ``e(t) = exp(2 pi i t)``,
so the transform of ``mu mod q`` at ``r`` is ``mu^(r/q)`` and numpy's forward
FFT computes it directly. Rational frequencies are carried as integer pairs
``(r, q)``; ``a**i r`` is reduced modulo ``q`` exactly before any float
conversion.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd, pi

import numpy as np

from .arith import ceil_log, divisors, lcm, mobius, num_divisors
from .measures import CyclicDistribution, LatticeMeasure, StepLaw, convolve, pushforward_scale
from .walk import WalkParams, evolve_exact, make_rng

__all__ = [
    "SpectrumSlice",
    "ProjectionDecomposition",
    "LargeSieveResult",
    "step_char",
    "step_char_rational",
    "walk_char",
    "walk_char_rational",
    "spectrum",
    "dft",
    "l2_dist_sq_mod",
    "fraction_digits",
    "digit_activity",
    "char_sup_away_from_zero",
    "char_decay_constant",
    "small_moduli_bound",
    "denominators",
    "pi_project",
    "project",
    "mobius_projection",
    "operator_norm_checks",
    "lattice_char_rational",
    "large_sieve_sum",
    "multiplicity_average",
    "multiplicity_cs_check",
]

DIRECT_DFT_MAX = 4096


@dataclass(frozen=True)
class SpectrumSlice:
    """Amplitudes ``mu_n^(r/q)`` for ``r = 0..q-1``."""

    q: int
    amplitudes: np.ndarray = field(repr=False)


def step_char(step: StepLaw, xi):
    """Characteristic function of the step law at real ``xi``."""
    xi = np.asarray(xi, dtype=float)
    ph = np.multiply.outer(xi, step.offsets.astype(float))
    return np.exp(-2j * pi * ph) @ step.probs


def step_char_rational(step: StepLaw, r, q: int):
    """``mu^(r/q)`` with the phase ``b r mod q`` formed in integers."""
    r = np.asarray(r, dtype=np.int64)
    ph = np.multiply.outer(r % q, step.offsets % q) % q
    return np.exp(-2j * pi * ph / q) @ step.probs


def walk_char(p: WalkParams, n: int, xi):
    """``mu_n^(xi) = prod_{i<n} mu^(a**i xi)`` for real ``xi``."""
    xi = np.asarray(xi, dtype=float) % 1.0
    out = np.ones(xi.shape, dtype=complex)
    for _ in range(n):
        out = out * step_char(p.step, xi)
        xi = (p.a * xi) % 1.0
    return out


def walk_char_rational(p: WalkParams, n: int, r, q: int):
    """Exact-frequency version of :func:`walk_char` at ``r/q``."""
    f = np.asarray(r, dtype=np.int64) % q
    out = np.ones(f.shape, dtype=complex)
    am = p.a % q
    for _ in range(n):
        out = out * step_char_rational(p.step, f, q)
        f = (am * f) % q
    return out


def spectrum(p: WalkParams, q: int, n: int) -> SpectrumSlice:
    return SpectrumSlice(q, walk_char_rational(p, n, np.arange(q), q))


def dft(mass) -> np.ndarray:
    """``hat(r) = sum_x mass[x] e(-r x / q)``.

    Direct summation up to ``DIRECT_DFT_MAX`` points, FFT above.
    """
    if isinstance(mass, CyclicDistribution):
        mass = mass.mass
    mass = np.asarray(mass)
    q = mass.size
    if q > DIRECT_DFT_MAX:
        return np.fft.fft(mass)
    x = np.arange(q, dtype=np.int64)
    out = np.empty(q, dtype=complex)
    for r0 in range(0, q, 256):
        r = np.arange(r0, min(q, r0 + 256), dtype=np.int64)
        ph = np.multiply.outer(r, x) % q
        out[r0:r0 + r.size] = np.exp(-2j * pi * ph / q) @ mass
    return out


def l2_dist_sq_mod(p: WalkParams, q: int, n: int) -> float:
    """``q ||mu_n mod q - u_q||_2^2 = sum_{r != 0} |mu_n^(r/q)|^2``."""
    if q < 2:
        raise ValueError("need q >= 2")
    amp = walk_char_rational(p, n, np.arange(1, q), q)
    return float(np.sum(amp.real**2 + amp.imag**2))


def fraction_digits(r: int, q: int, a: int, n: int) -> list:
    """First ``n`` base-``a`` digits of ``r/q`` in ``[0, 1)``."""
    out, r = [], r % q
    for _ in range(n):
        d, r = divmod(a * r, q)
        out.append(d)
    return out


def digit_activity(digits, a: int) -> int:
    """Number of ``i`` in ``1..n-1`` with NOT ``xi_i == xi_{i+1} in {0, a-1}``."""
    return sum(
        1 for x, y in zip(digits, digits[1:]) if not (x == y and x in (0, a - 1))
    )


def char_sup_away_from_zero(step: StepLaw, a: int, h: float = 1e-6):
    """Certified upper bound on ``sup{|mu^(xi)| : |xi| >= a**-2}``.

    The sup is taken on a grid of step ``h`` over ``[a**-2, 1/2]`` (enough,
    since ``|mu^(-xi)| = |mu^(xi)|``) and inflated by ``L h / 2`` with the
    Lipschitz constant ``L = 2 pi E|b|``.

    Returns ``(rho, grid_max, argmax)``.
    """
    lo = a**-2.0
    npts = int(np.ceil((0.5 - lo) / h)) + 1
    best, arg = 0.0, lo
    for start in range(0, npts, 1 << 18):
        xi = lo + h * np.arange(start, min(npts, start + (1 << 18)))
        xi = np.minimum(xi, 0.5)
        v = np.abs(step_char(step, xi))
        k = int(np.argmax(v))
        if v[k] > best:
            best, arg = float(v[k]), float(xi[k])
    lip = 2 * pi * step.mean_abs
    return min(1.0, best + lip * h / 2), best, arg


def char_decay_constant(step: StepLaw, npts: int = 20001) -> float:
    """Largest ``c`` with ``|mu^(xi)| <= exp(-c |xi|^2)`` on a grid of ``(0, 1/2]``."""
    xi = np.linspace(0.5 / npts, 0.5, npts)
    v = np.abs(step_char(step, xi))
    with np.errstate(divide="ignore"):
        c = -np.log(v) / xi**2
    return float(np.min(c))


def small_moduli_bound(p: WalkParams, q: int, n: int, rho: float | None = None) -> float:
    """Explicit bound ``a((1 + a rho^{2k})^{n0} - 1) >= q ||mu_n mod q - u_q||_2^2``.

    ``n0 = ceil(log_a q)``, ``k = floor(n / n0)`` and ``rho`` is the certified
    sup of the step characteristic function off ``|xi| < a**-2``.
    """
    if gcd(q, p.a) != 1:
        raise ValueError(f"gcd(q={q}, a={p.a}) != 1")
    n0 = ceil_log(q, p.a)
    if n0 == 0:
        return 0.0
    if rho is None:
        rho = char_sup_away_from_zero(p.step, p.a)[0]
    k = n // n0
    return p.a * float(np.expm1(n0 * np.log1p(p.a * rho ** (2 * k))))


# --- projections ----------------------------------------------------------


def denominators(q: int) -> np.ndarray:
    """Reduced denominator of ``r/q`` for ``r = 0..q-1``."""
    r = np.arange(q)
    return q // np.gcd(r, q)


def _as_mass(nu) -> np.ndarray:
    if isinstance(nu, CyclicDistribution):
        return nu.mass
    return np.asarray(nu, dtype=float)


def pi_project(nu, s: int) -> np.ndarray:
    """``pi_s nu`` lifted to Z/qZ: keep frequencies whose denominator divides ``s``."""
    m = _as_mass(nu)
    q = m.size
    if q % s:
        raise ValueError(f"{s} does not divide {q}")
    mask = (s % denominators(q)) == 0
    return np.real(np.fft.ifft(np.fft.fft(m) * mask))


@dataclass
class ProjectionDecomposition:
    """Components ``P_s^{(q0)} nu`` for ``q0 | s | q`` as vectors on Z/qZ.

    Each component is uniform on fibres mod ``s`` so its l1 norm equals that
    of the corresponding measure on Z/sZ.
    """

    q: int
    q0: int
    components: dict
    d: int
    mobius_table: dict

    def frequency_support(self, s: int) -> np.ndarray:
        den = denominators(self.q)
        return np.flatnonzero(np.array([lcm(int(t), self.q0) for t in den]) == s)

    def total(self) -> np.ndarray:
        return np.sum(list(self.components.values()), axis=0)


def project(nu, q0: int, *, max_q: int = 10**6) -> ProjectionDecomposition:
    """Split ``nu mod q`` into the pieces ``P_s^{(q0)}``, ``q0 | s | q``."""
    m = _as_mass(nu)
    q = m.size
    if q > max_q:
        raise ValueError(f"q={q} above projection cap {max_q}")
    if q0 < 1 or q % q0:
        raise ValueError(f"q0={q0} does not divide q={q}")
    hat = np.fft.fft(m)
    den = denominators(q)
    lcms = np.array([lcm(int(t), q0) for t in den])
    comps = {}
    for s in divisors(q):
        if s % q0 == 0:
            comps[s] = np.real(np.fft.ifft(hat * (lcms == s)))
    qq = q // q0
    return ProjectionDecomposition(
        q, q0, comps, num_divisors(qq), {d: mobius(d) for d in divisors(qq)}
    )


def mobius_projection(nu, q0: int) -> np.ndarray:
    """``P_q^{(q0)} nu = sum_{q0 | q1 | q} moebius(q / q1) pi_{q1} nu``."""
    m = _as_mass(nu)
    q = m.size
    out = np.zeros(q)
    for q1 in divisors(q):
        if q1 % q0 == 0:
            mu = mobius(q // q1)
            if mu:
                out += mu * pi_project(m, q1)
    return out


def operator_norm_checks(q: int, q0: int, trials: int = 1000, seed: int = 0) -> dict:
    """Largest observed ``||pi_q nu|| / ||nu||`` and ``||P_q^{(q0)} nu|| / ||nu||``.

    ``nu`` ranges over random probability measures on ``[0, 4q)``; both
    operators only see ``nu mod q``.
    """
    if q % q0:
        raise ValueError(f"q0={q0} does not divide q={q}")
    rng = make_rng(seed)
    d = num_divisors(q // q0)
    worst_pi = worst_p = 0.0
    for t in range(trials):
        nu = rng.dirichlet(np.full(4 * q, 0.3 if t % 2 else 1.0))
        nu_q = nu.reshape(4, q).sum(axis=0)
        worst_pi = max(worst_pi, float(np.abs(nu_q).sum()))
        worst_p = max(worst_p, float(np.abs(mobius_projection(nu_q, q0)).sum()))
    return {
        "q": q,
        "q0": q0,
        "trials": trials,
        "divisor_bound": d,
        "max_ratio_pi": worst_pi,
        "max_ratio_P": worst_p,
        "ok": worst_pi <= 1 + 1e-12 and worst_p <= d + 1e-12,
    }


# --- large sieve ------------------------------------------------------------


def lattice_char_rational(m: LatticeMeasure, r, s: int):
    """``m^(r/s)`` for an array of numerators ``r``, phases reduced exactly."""
    r = np.atleast_1d(np.asarray(r, dtype=np.int64)) % s
    xs = m.sites % s
    out = np.empty(r.size, dtype=complex)
    for k, rk in enumerate(r):
        out[k] = np.exp(-2j * pi * ((xs * rk) % s) / s) @ m.masses
    return out


@dataclass(frozen=True)
class LargeSieveResult:
    lhs: float
    rhs: float
    N: int
    Q: int
    q0: int
    fractions: int

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs


def large_sieve_sum(nu: LatticeMeasure, q0: int, Q: int) -> LargeSieveResult:
    """``sum_{q in [Q/2, Q], q0 | q} q ||P_q^{(q0)} nu||_2^2`` against ``(Q^2 + 2N)||nu||_2^2``.

    ``q ||P_q^{(q0)} nu||_2^2`` is the sum of ``|nu^(r/s)|^2`` over reduced
    fractions with ``s | q`` and ``lcm(s, q0) = q``; ``nu^(r/s)`` comes from an
    FFT of ``nu mod s``.
    """
    if Q < 2 * q0:
        raise ValueError("need Q >= 2 q0")
    N = int(max(abs(int(nu.sites[0])), abs(int(nu.sites[-1])))) if len(nu) else 0
    lhs, count = 0.0, 0
    for q in range((Q + 1) // 2, Q + 1):
        if q % q0:
            continue
        for s in divisors(q):
            if lcm(s, q0) != q:
                continue
            hat = np.fft.fft(np.bincount(nu.sites % s, weights=nu.masses, minlength=s))
            r = np.arange(s)
            coprime = np.gcd(r, s) == 1
            lhs += float(np.sum(np.abs(hat[coprime]) ** 2))
            count += int(coprime.sum())
    rhs = (Q * Q + 2 * N) * float(np.dot(nu.masses, nu.masses))
    return LargeSieveResult(lhs, rhs, N, Q, q0, count)


def _mixture(parts, weights) -> LatticeMeasure:
    sites = np.concatenate([m.sites for m in parts])
    masses = np.concatenate([w * m.masses for m, w in zip(parts, weights)])
    return LatticeMeasure(sites, masses)


def multiplicity_average(p: WalkParams, nu: LatticeMeasure, n: int, m: int) -> LatticeMeasure:
    """``(1/(m+1)) sum_{i<=m} mu_i * (m_{a^i})_* nu * (m_{a^{i+n}})_* mu_{m-i}``."""
    laws = [evolve_exact(p, i) for i in range(m + 1)]
    parts = []
    for i in range(m + 1):
        left = convolve(laws[i], pushforward_scale(nu, p.a**i))
        parts.append(convolve(left, pushforward_scale(laws[m - i], p.a ** (i + n))))
    return _mixture(parts, [1.0 / (m + 1)] * (m + 1))


def multiplicity_cs_check(p: WalkParams, nu: LatticeMeasure, n: int, m: int,
                          trials: int = 1000, seed: int = 0, s_max: int = 10**4) -> dict:
    """Worst excess of ``|avg^(xi)|^2`` over ``(1/(m+1)) sum_{i<=m} |nu^(a^i xi)|^2``.

    ``xi = r/s`` runs over ``trials`` random reduced fractions with ``s <= s_max``.
    """
    avg = multiplicity_average(p, nu, n, m)
    rng = make_rng(seed)
    worst = -np.inf
    for _ in range(trials):
        s = int(rng.integers(2, s_max + 1))
        r = int(rng.integers(1, s))
        lhs = abs(lattice_char_rational(avg, r, s)[0]) ** 2
        rhs = np.mean([abs(lattice_char_rational(nu, (r * pow(p.a, i, s)) % s, s)[0]) ** 2
                       for i in range(m + 1)])
        worst = max(worst, lhs - rhs)
    return {"n": n, "m": m, "trials": trials, "max_excess": float(worst),
            "ok": bool(worst <= 1e-12)}

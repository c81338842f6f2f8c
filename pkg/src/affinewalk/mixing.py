"""Mixing-time scans of ``X_n mod q``.

Distances are reported in the halved convention ``1/2 ||mu_n mod q - u_q||``
(``half_tv``); ``t_mix`` is the first ``n`` with ``half_tv <= eps``. The
normalised mixing time ``t_mix * H / log q`` is base-free and close to 1 at
the cutoff; the ``log_2`` column ``t_mix / log2 q`` compares directly with
cutoff constants quoted in ``log_2 q`` units.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from math import gcd, log, log2

import numpy as np

from . import kernels
from .arith import is_prime, primes_upto
from .entropy import reference_rate
from .walk import CapExceeded, WalkParams, make_rng, support_span

__all__ = [
    "MixingRecord",
    "MixingReport",
    "tv_curve",
    "lower_bound_check",
    "mixing_scan",
    "admissible_moduli",
    "exceptional_family_scan",
    "exceptional_prime_density",
    "MAX_DENSE_Q",
]

MAX_DENSE_Q = 1 << 26
MONOTONE_TOL = 1e-12


@dataclass
class MixingRecord:
    q: int
    is_prime: bool
    log2_q: float
    t_mix: int | None
    normalized: float | None
    eps: float
    tv_samples: list | None = None
    l2_at_tmix: float | None = None
    error: str | None = None

    @property
    def log2_ratio(self) -> float | None:
        """``t_mix / log2 q``."""
        return None if self.t_mix is None else self.t_mix / self.log2_q


def _H(p, H_ref):
    return float(H_ref) if H_ref is not None else reference_rate(p).value


def tv_curve(
    p: WalkParams,
    q: int,
    n_max: int | None = None,
    eps: float = 0.25,
    H_ref: float | None = None,
    *,
    keep_samples: bool = True,
    stop_at_mix: bool = True,
) -> MixingRecord:
    """Half-TV to uniform along ``n = 0, 1, ...`` and the resulting ``t_mix``.

    The spectral quantity ``q ||mu_n mod q - u_q||_2^2`` is tracked as a
    certificate only (``(half_tv)^2 <= q ||.||_2^2 / 4``); the reported
    distance is always the exact l1 one.
    """
    if q < 2:
        raise ValueError("need q >= 2")
    if gcd(q, p.a) != 1:
        raise ValueError(f"gcd(q={q}, a={p.a}) != 1")
    if q > MAX_DENSE_Q:
        raise CapExceeded(f"q={q} above dense cap {MAX_DENSE_Q}")
    H = _H(p, H_ref)
    if n_max is None:
        n_max = int(math.ceil(4 * log(q) / H)) + 30
    curve, _ = kernels.evolve_mod_curve(
        p.a, p.step.offsets, p.step.probs, q, n_max, eps if stop_at_mix else -1.0
    )
    tv = curve[:, 0]
    if np.any(np.diff(tv) > MONOTONE_TOL):
        k = int(np.argmax(np.diff(tv)))
        raise RuntimeError(f"half-TV increased at n={k + 1} for q={q}")
    hits = np.flatnonzero(tv <= eps)
    t_mix = int(hits[0]) if hits.size else None
    return MixingRecord(
        q=q,
        is_prime=is_prime(q),
        log2_q=log2(q),
        t_mix=t_mix,
        normalized=None if t_mix is None else t_mix * H / log(q),
        eps=eps,
        tv_samples=[(k, float(v)) for k, v in enumerate(tv)] if keep_samples else None,
        l2_at_tmix=None if t_mix is None else float(curve[t_mix, 1]),
    )


@dataclass
class LowerBoundReport:
    q: int
    delta: float
    H_ref: float
    n: int
    half_tv: float
    support_certificate: float
    log2_q: float
    violation: bool


def lower_bound_check(p: WalkParams, q: int, delta: float, H_ref: float) -> LowerBoundReport:
    """Half-TV at ``n = floor((1 - delta) log q / H_ref)``.

    ``violation`` flags ``half_tv < 0.9`` once ``log2 q >= 20``. The support
    certificate is ``1 - |supp mu_n| / q`` (a valid lower bound whenever it is
    positive).
    """
    if H_ref <= 0:
        raise ValueError("H_ref must be positive")
    n = max(0, int(math.floor((1 - delta) * log(q) / H_ref)))
    curve, _ = kernels.evolve_mod_curve(p.a, p.step.offsets, p.step.probs, q, n, -1.0)
    half = float(curve[-1, 0])
    supp = min(support_span(p, n), len(p.step.atoms) ** n)
    return LowerBoundReport(
        q=q,
        delta=delta,
        H_ref=H_ref,
        n=n,
        half_tv=half,
        support_certificate=max(0.0, 1.0 - supp / q),
        log2_q=log2(q),
        violation=log2(q) >= 20 and half < 0.9,
    )


@dataclass
class MixingReport:
    params: dict
    records: list = field(default_factory=list)

    def ok_records(self):
        return [r for r in self.records if r.t_mix is not None]

    def aggregates(self, quantiles=(0.05, 0.25, 0.5, 0.75, 0.95)) -> dict:
        ok = self.ok_records()
        norm = np.array([r.normalized for r in ok])
        lg2 = np.array([r.log2_ratio for r in ok])
        out = {"count": len(self.records), "mixed": len(ok)}
        if ok:
            for qt in quantiles:
                out[f"normalized_q{qt:g}"] = float(np.quantile(norm, qt))
                out[f"log2_ratio_q{qt:g}"] = float(np.quantile(lg2, qt))
            out["normalized_min"] = float(norm.min())
            out["normalized_max"] = float(norm.max())
            thr = self.params.get("exceptional_factor", 1.25) * float(np.median(norm))
        else:
            thr = math.inf
        exc = [r for r in self.records if r.t_mix is None or r.normalized > thr]
        out["exceptional_count"] = len(exc)
        out["exceptional_prime_weight"] = float(sum(log(r.q) / r.q for r in exc if r.is_prime))
        out["errors"] = sum(1 for r in self.records if r.error)
        return out

    def to_rows(self) -> list:
        return [
            {
                "q": r.q,
                "is_prime": int(r.is_prime),
                "t_mix": "" if r.t_mix is None else r.t_mix,
                "log2_q": r.log2_q,
                "normalized": "" if r.normalized is None else r.normalized,
                "log2_ratio": "" if r.t_mix is None else r.log2_ratio,
            }
            for r in self.records
        ]


def admissible_moduli(a, q_min, q_max, filter="odd", stride=1, sample=None, seed=0) -> list:
    qs = [q for q in range(max(2, q_min), q_max + 1, stride) if gcd(q, a) == 1]
    if filter == "odd":
        qs = [q for q in qs if q % 2]
    elif filter == "prime":
        qs = [q for q in qs if is_prime(q)]
    elif filter not in ("coprime", "stride"):
        raise ValueError(f"unknown filter {filter!r}")
    if sample is not None and sample < len(qs):
        pick = make_rng(seed).choice(len(qs), size=sample, replace=False)
        qs = [qs[i] for i in sorted(pick)]
    return qs


def _scan_one(args):
    p, q, eps, H, n_max = args
    try:
        return tv_curve(p, q, n_max, eps, H, keep_samples=False)
    except Exception as exc:  # noqa: BLE001  -- one bad modulus must not sink the scan
        return MixingRecord(q, is_prime(q), log2(q), None, None, eps, error=repr(exc))


def mixing_scan(
    p: WalkParams,
    q_min: int,
    q_max: int,
    eps: float = 0.25,
    filter: str = "odd",
    H_ref: float | None = None,
    workers: int = 1,
    *,
    stride: int = 1,
    sample: int | None = None,
    seed: int = 0,
    n_max: int | None = None,
) -> MixingReport:
    """``tv_curve`` over admissible moduli in ``[q_min, q_max]``.

    ``filter`` is one of ``odd``, ``prime``, ``coprime`` (to ``a``) or
    ``stride``; ``sample`` draws that many moduli at random (seeded) from the
    admissible set. Records come back sorted by ``q`` whatever ``workers`` is.
    """
    H = _H(p, H_ref)
    qs = admissible_moduli(p.a, q_min, q_max, filter, stride, sample, seed)
    jobs = [(p, q, eps, H, n_max) for q in qs]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            records = list(ex.map(_scan_one, jobs, chunksize=max(1, len(jobs) // (8 * workers))))
    else:
        records = [_scan_one(j) for j in jobs]
    records.sort(key=lambda r: r.q)
    params = {
        "a": p.a,
        "step": p.step.render(),
        "eps": eps,
        "tv_convention": "half",
        "q_min": q_min,
        "q_max": q_max,
        "filter": filter,
        "stride": stride,
        "sample": sample,
        "seed": seed,
        "H_ref": H,
    }
    return MixingReport(params, records)


def exceptional_family_scan(
    p: WalkParams,
    k_range,
    eps: float = 0.25,
    H_ref: float | None = None,
    controls: int = 31,
    seed: int = 0,
    workers: int = 1,
) -> list:
    """Mixing of ``q = a**k - 1`` against random moduli of matching size.

    Controls are ``controls`` moduli coprime to ``a`` (odd as well when
    ``a = 2``) drawn from ``[q / sqrt 2, q sqrt 2]``. ``excess_ratio`` is the
    family's normalised mixing time over the controls' median.
    """
    H = _H(p, H_ref)
    rows = []
    for k in k_range:
        q = p.a**k - 1
        if q < 2:
            rows.append({"k": k, "q": q, "t_mix": 0, "normalized": None,
                         "control_median": None, "excess_ratio": None})
            continue
        rec = tv_curve(p, q, None, eps, H, keep_samples=False)
        lo, hi = max(2, int(q / math.sqrt(2))), int(q * math.sqrt(2))
        ctrl = mixing_scan(p, lo, hi, eps, "odd" if p.a % 2 == 0 else "coprime", H, workers,
                           sample=controls, seed=seed + k)
        med = float(np.median([r.normalized for r in ctrl.ok_records()]))
        rows.append({
            "k": k,
            "q": q,
            "t_mix": rec.t_mix,
            "normalized": rec.normalized,
            "control_median": med,
            "excess_ratio": None if rec.normalized is None else rec.normalized / med,
        })
    return rows


def _prime_mixed(args):
    p, prime, n, eps = args
    curve, _ = kernels.evolve_mod_curve(p.a, p.step.offsets, p.step.probs, prime, n, eps)
    return float(curve[-1, 0])


def exceptional_prime_density(
    p: WalkParams,
    n: int,
    eps: float = 0.25,
    p_max: int = 10**6,
    H_ref: float | None = None,
    workers: int = 1,
) -> dict:
    """Weighted count of primes where ``mu_n mod p`` is still far from uniform.

    Over primes ``p <= p_max`` coprime to ``a`` with ``log p <= (1/2 - eps) H n``,
    sums ``log p / p`` over those with half-TV at ``n`` at least ``eps``, and
    reports it next to the Mertens total over the same primes.
    """
    H = _H(p, H_ref)
    limit = min(p_max, int(math.exp((0.5 - eps) * H * n)))
    primes = [x for x in primes_upto(limit) if gcd(x, p.a) == 1]
    jobs = [(p, x, n, eps) for x in primes]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            tvs = list(ex.map(_prime_mixed, jobs, chunksize=max(1, len(jobs) // (8 * workers))))
    else:
        tvs = [_prime_mixed(j) for j in jobs]
    weights = np.array([log(x) / x for x in primes])
    bad = np.array([t >= eps for t in tvs], dtype=bool)
    mertens = float(weights.sum())
    exc = float(weights[bad].sum()) if primes else 0.0
    return {
        "n": n,
        "eps": eps,
        "prime_limit": limit,
        "primes": len(primes),
        "exceptional": int(bad.sum()),
        "exceptional_sum": exc,
        "mertens_total": mertens,
        "density": exc / mertens if mertens else 0.0,
        "sqrt_n": math.sqrt(n),
    }


def record_dict(rec: MixingRecord) -> dict:
    return asdict(rec)

"""Command-line driver.

Every subcommand produces a table (fixed column order), an optional summary
and a reproducibility block, written as CSV (summary and metadata as leading
``#`` lines) or JSON (``{"meta", "rows", "summary"}``).

Exit codes: 0 success, 2 validation error, 3 size cap exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
import time
from datetime import datetime, timezone

import numpy as np

from . import __version__, kernels
from .measures import StepLaw
from .walk import CapExceeded, WalkParams

EXIT_OK, EXIT_VALIDATION, EXIT_CAP = 0, 2, 3
LOG2 = math.log(2)

_UNIFORM = re.compile(r"^\s*u\{([^}]*)\}\s*$")
_ATOM = re.compile(r"^\s*([+-]?\d+)\s*:\s*(\d+)\s*$")


class StepSyntaxError(ValueError):
    pass


def parse_step_law(spec: str) -> StepLaw:
    """Parse ``"u{-1,0,1}"`` or ``"offset:weight,offset:weight,..."``."""
    m = _UNIFORM.match(spec)
    if m:
        try:
            offs = [int(t) for t in m.group(1).split(",")]
        except ValueError:
            raise StepSyntaxError(f"bad uniform step law {spec!r}") from None
        if len(set(offs)) != len(offs):
            raise ValueError(f"duplicate offsets in {spec!r}")
        return StepLaw.uniform(offs)
    atoms = []
    for part in spec.split(","):
        am = _ATOM.match(part)
        if not am:
            raise StepSyntaxError(f"cannot parse atom {part!r} in {spec!r}; expected offset:weight")
        atoms.append((int(am.group(1)), int(am.group(2))))
    if len({b for b, _ in atoms}) != len(atoms):
        raise ValueError(f"duplicate offsets in {spec!r}")
    if any(w < 1 for _, w in atoms):
        raise ValueError("weights must be positive integers")
    return StepLaw(tuple(atoms))


def render_step_law(step: StepLaw) -> str:
    return step.render()


class Output:
    """Accumulates rows so partial results can be flushed on failure."""

    def __init__(self, columns):
        self.columns = list(columns)
        self.rows = []
        self.summary = {}

    def add(self, **row):
        self.rows.append(row)


def _meta(args, status):
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "output")}
    meta = {
        "tool": "affinewalk",
        "version": __version__,
        "command": args.command,
        "status": status,
        "backend": kernels.BACKEND,
        "tv_convention": "half: 1/2 sum |p - u|",
        "config": cfg,
    }
    if not args.no_timestamp:
        meta["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return meta


def _clean(v):
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def write_output(out: Output, args, status="complete"):
    meta = _meta(args, status)
    rows = [{c: _clean(r.get(c, "")) for c in out.columns} for r in out.rows]
    summary = {k: _clean(v) for k, v in out.summary.items()}
    if args.format == "json":
        text = json.dumps({"meta": meta, "rows": rows, "summary": summary}, indent=1) + "\n"
    else:
        buf = io.StringIO()
        for k, v in meta.items():
            buf.write(f"# {k}: {json.dumps(v)}\n")
        for k, v in summary.items():
            buf.write(f"# summary.{k}: {json.dumps(v)}\n")
        w = csv.DictWriter(buf, fieldnames=out.columns, lineterminator="\r\n")
        w.writeheader()
        w.writerows(rows)
        footer = getattr(out, "footer", None)
        if footer:
            w.writerow({c: _clean(footer.get(c, "")) for c in out.columns})
        text = buf.getvalue()
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# --- subcommands -----------------------------------------------------------


def _params(args) -> WalkParams:
    return WalkParams(args.a, parse_step_law(args.step))


def _H_ref(args, p):
    if getattr(args, "H_ref", None):
        return args.H_ref
    from .entropy import reference_rate

    return reference_rate(p).value


def cmd_entropy(args, out):
    from .entropy import entropy_curve, rate_exact

    p = _params(args)
    H = entropy_curve(p, args.n_max)
    out.columns = ["n", "H_nats", "H_bits", "increment_nats", "increment_bits", "cesaro_bits"]
    for n, h in enumerate(H):
        inc = h - H[n - 1] if n else float("nan")
        out.add(n=n, H_nats=h, H_bits=h / LOG2, increment_nats=inc, increment_bits=inc / LOG2,
                cesaro_bits=h / n / LOG2 if n else float("nan"))
    if args.n_max >= 4:
        inc, ces = rate_exact(p, args.n_max)
        out.summary.update(rate_increment_bits=inc.bits, rate_width_bits=inc.standard_error_bits,
                           rate_cesaro_bits=ces.bits, width_kind="heuristic")


def cmd_smb(args, out):
    from .entropy import concentration_profile, smb_estimate

    p = _params(args)
    out.columns = ["n", "H_nats", "H_bits", "var", "var_over_n", "tail", "tail_scaled"]
    for row in concentration_profile(p, range(args.n_min, args.exact_n + 1), [args.alpha]):
        out.add(n=row["n"], H_nats=row["H"], H_bits=row["H"] / LOG2, var=row["var"],
                var_over_n=row["var_over_n"], tail=row[f"tail[{args.alpha}]"],
                tail_scaled=row[f"tail_scaled[{args.alpha}]"])
    est = smb_estimate(p, args.n, args.samples, args.seed)
    out.summary.update(smb_n=args.n, samples=args.samples, seed=args.seed, alpha=args.alpha,
                       smb_rate_nats=est.value, smb_rate_bits=est.bits,
                       smb_se_bits=est.standard_error_bits,
                       tail_constant_empirical=max((r["tail_scaled"] for r in out.rows), default=0.0),
                       var_slope_empirical=max((r["var_over_n"] for r in out.rows), default=0.0))


def cmd_hhms(args, out):
    from .hhms import L_at_one_third, PUBLISHED_RATIO, enumerate_levels, entropy_ratio, series_terms

    t0 = time.perf_counter()
    levels = enumerate_levels(args.levels)
    terms = series_terms(args.levels, levels)
    out.columns = ["n", "pair_count", "a_n", "max_j", "term"]
    for lv, t in zip(levels, terms):
        out.add(n=lv.level, pair_count=lv.pair_count, a_n=lv.a_n, max_j=lv.max_j, term=t)
    L, rem = L_at_one_third(args.levels, levels)
    ratio = entropy_ratio(args.levels, levels)
    out.summary.update(levels=args.levels, L_one_third=L, remainder_indicator=rem, ratio=ratio,
                       H_nats=ratio * LOG2, mixing_constant=1.0 / ratio,
                       published_ratio=PUBLISHED_RATIO)
    if not args.no_timestamp:
        out.summary["seconds"] = round(time.perf_counter() - t0, 3)


def cmd_tv(args, out):
    from .mixing import tv_curve

    p = _params(args)
    H = _H_ref(args, p)
    rec = tv_curve(p, args.q, args.n_max, args.eps, H, stop_at_mix=False)
    out.columns = ["n", "half_tv", "l1"]
    for n, v in rec.tv_samples:
        out.add(n=n, half_tv=v, l1=2 * v)
    out.summary.update(q=args.q, eps=args.eps, t_mix=rec.t_mix, normalized=rec.normalized,
                       log2_q=rec.log2_q, H_ref_nats=H)


def cmd_mix_scan(args, out):
    from .mixing import mixing_scan

    p = _params(args)
    H = _H_ref(args, p)
    filt = "prime" if args.prime else "coprime" if args.coprime else "stride" if args.stride > 1 else "odd"
    rep = mixing_scan(p, args.q_min, args.q_max, args.eps, filt, H, args.workers,
                      stride=args.stride, sample=args.sample, seed=args.seed, n_max=args.n_max)
    out.columns = ["q", "is_prime", "t_mix", "log2_q", "normalized", "log2_ratio"]
    for row in rep.to_rows():
        out.add(**row)
    agg = rep.aggregates()
    out.summary.update(agg)
    out.summary["H_ref_nats"] = H
    if agg.get("mixed"):
        out.footer = {"q": "aggregate_median", "normalized": agg["normalized_q0.5"],
                      "log2_ratio": agg["log2_ratio_q0.5"], "t_mix": "", "is_prime": ""}


def cmd_exceptional(args, out):
    from .mixing import exceptional_family_scan, exceptional_prime_density

    p = _params(args)
    H = _H_ref(args, p)
    rows = exceptional_family_scan(p, range(args.k_min, args.k_max + 1), args.eps, H,
                                   args.controls, args.seed, args.workers)
    out.columns = ["k", "q", "t_mix", "normalized", "control_median", "excess_ratio"]
    for r in rows:
        out.add(**r)
    ratios = [r["excess_ratio"] for r in rows if r["excess_ratio"] is not None]
    out.summary["excess_nondecreasing"] = bool(all(b >= a - 1e-12 for a, b in zip(ratios, ratios[1:])))
    if args.density_n:
        d = exceptional_prime_density(p, args.density_n, args.eps, args.p_max, H, args.workers)
        out.summary.update({f"density.{k}": v for k, v in d.items()})


def cmd_spectrum(args, out):
    from .spectral import char_sup_away_from_zero, l2_dist_sq_mod, small_moduli_bound, spectrum
    from .arith import ceil_log

    p = _params(args)
    sl = spectrum(p, args.q, args.n)
    out.columns = ["r", "re", "im", "abs"]
    for r, z in enumerate(sl.amplitudes):
        out.add(r=r, re=z.real, im=z.imag, abs=abs(z))
    rho, grid_max, arg = char_sup_away_from_zero(p.step, p.a)
    out.summary.update(q=args.q, n=args.n, l2_dist_sq=l2_dist_sq_mod(p, args.q, args.n),
                       rho_certified=rho, rho_grid=grid_max, rho_argmax=arg,
                       n0=ceil_log(args.q, p.a), k=args.n // max(1, ceil_log(args.q, p.a)))
    if math.gcd(args.q, p.a) == 1:
        out.summary["small_moduli_bound"] = small_moduli_bound(p, args.q, args.n, rho)


def cmd_sieve_check(args, out):
    from .arith import divisors
    from .measures import LatticeMeasure
    from .spectral import (large_sieve_sum, mobius_projection, multiplicity_cs_check,
                           operator_norm_checks, project)
    from .walk import evolve_exact
    from .walk import make_rng

    rng = make_rng(args.seed)
    out.columns = ["q", "q0", "partition_err", "mobius_err", "max_ratio_P", "divisor_bound", "ok"]
    for q in args.q:
        nu = rng.dirichlet(np.ones(q))
        for q0 in divisors(q):
            dec = project(nu, q0)
            top = dec.components[q]
            part = float(np.max(np.abs(dec.total() - nu)))
            mob = float(np.max(np.abs(mobius_projection(nu, q0) - top)))
            chk = operator_norm_checks(q, q0, args.trials, args.seed)
            out.add(q=q, q0=q0, partition_err=part, mobius_err=mob, max_ratio_P=chk["max_ratio_P"],
                    divisor_bound=chk["divisor_bound"], ok=int(chk["ok"] and part < 1e-10 and mob < 1e-10))
    worst = 0.0
    for t in range(args.sieve_trials):
        N = int(rng.integers(1, args.N + 1))
        sites = np.arange(-N, N + 1)
        mu = LatticeMeasure(sites, rng.dirichlet(np.full(sites.size, 0.5)))
        res = large_sieve_sum(mu, 1, args.Q)
        worst = max(worst, res.ratio)
    p = _params(args)
    cs = multiplicity_cs_check(p, evolve_exact(p, args.n), args.n, args.m, args.trials, args.seed)
    out.summary.update(large_sieve_trials=args.sieve_trials, large_sieve_max_ratio=worst,
                       multiplicity_max_excess=cs["max_excess"], multiplicity_ok=cs["ok"])


COMMANDS = {
    "entropy": cmd_entropy,
    "smb": cmd_smb,
    "hhms": cmd_hhms,
    "tv": cmd_tv,
    "mix-scan": cmd_mix_scan,
    "exceptional": cmd_exceptional,
    "spectrum": cmd_spectrum,
    "sieve-check": cmd_sieve_check,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="affinewalk", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--a", type=int, default=2, help="multiplier a >= 2")
    common.add_argument("--step", default="u{-1,0,1}", help='step law, "u{-1,0,1}" or "-1:1,0:1,1:1"')
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--output", "-o", default=None, help="output file (default stdout)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=int(os.environ.get("AFFINEWALK_WORKERS", "1")))
    common.add_argument("--no-timestamp", action="store_true", help="omit the timestamp field")
    common.add_argument("--H-ref", dest="H_ref", type=float, default=None,
                        help="entropy rate in nats (default: best available estimate)")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("entropy", parents=[common], help="entropy curve and exact rate")
    s.add_argument("--n-max", type=int, default=20)

    s = sub.add_parser("smb", parents=[common], help="Monte-Carlo rate and concentration diagnostics")
    s.add_argument("--n", type=int, default=200)
    s.add_argument("--samples", type=int, default=10_000)
    s.add_argument("--alpha", type=float, default=0.1)
    s.add_argument("--n-min", type=int, default=8)
    s.add_argument("--exact-n", type=int, default=20)

    s = sub.add_parser("hhms", parents=[common], help="closed-form entropy constant of the model case")
    s.add_argument("--levels", type=int, default=32)

    s = sub.add_parser("tv", parents=[common], help="half-TV curve for one modulus")
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--n-max", type=int, default=None)
    s.add_argument("--eps", type=float, default=0.25)

    s = sub.add_parser("mix-scan", parents=[common], help="mixing times over a range of moduli")
    s.add_argument("--q-min", type=int, required=True)
    s.add_argument("--q-max", type=int, required=True)
    s.add_argument("--eps", type=float, default=0.25)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--odd", action="store_true", help="odd moduli (default)")
    g.add_argument("--prime", action="store_true")
    g.add_argument("--coprime", action="store_true", help="all moduli coprime to a")
    s.add_argument("--stride", type=int, default=1)
    s.add_argument("--sample", type=int, default=None, help="random subset of this size")
    s.add_argument("--n-max", type=int, default=None)

    s = sub.add_parser("exceptional", parents=[common], help="q = a^k - 1 family and exceptional primes")
    s.add_argument("--k-min", type=int, default=12)
    s.add_argument("--k-max", type=int, default=20)
    s.add_argument("--eps", type=float, default=0.25)
    s.add_argument("--controls", type=int, default=31)
    s.add_argument("--density-n", type=int, default=None)
    s.add_argument("--p-max", type=int, default=10**6)

    s = sub.add_parser("spectrum", parents=[common], help="Fourier amplitudes and l2 bounds")
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--n", type=int, required=True)

    s = sub.add_parser("sieve-check", parents=[common], help="projection, norm and large-sieve checks")
    s.add_argument("--q", type=int, nargs="+", default=[12, 30, 36, 210])
    s.add_argument("--trials", type=int, default=200)
    s.add_argument("--sieve-trials", type=int, default=20)
    s.add_argument("--N", type=int, default=10_000)
    s.add_argument("--Q", type=int, default=128)
    s.add_argument("--n", type=int, default=8, help="depth of the averaged law")
    s.add_argument("--m", type=int, default=4, help="averaging length")
    return ap


def _validate(args):
    if getattr(args, "eps", 0.25) is not None and not 0 < getattr(args, "eps", 0.25) < 1:
        raise ValueError("--eps must lie in (0, 1)")
    for name in ("n_max", "n", "samples", "levels", "q", "q_min", "q_max", "trials"):
        v = getattr(args, name, None)
        if isinstance(v, int) and v < 0:
            raise ValueError(f"--{name.replace('_', '-')} must be nonnegative")
    if args.workers < 1:
        raise ValueError("--workers must be >= 1")


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    out = Output([])
    try:
        _validate(args)
        parse_step_law(args.step)
        COMMANDS[args.command](args, out)
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        if out.rows:
            write_output(out, args, "incomplete")
        return EXIT_CAP
    except (ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        if out.rows:
            write_output(out, args, "incomplete")
        return EXIT_VALIDATION
    except KeyboardInterrupt:
        if out.rows:
            write_output(out, args, "incomplete")
        return 130
    write_output(out, args)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

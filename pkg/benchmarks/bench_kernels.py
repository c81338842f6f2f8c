"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from affinewalk import kernels
from affinewalk.hhms import _jlogj_table
from affinewalk.walk import WalkParams, make_rng, sample_steps, step_digits


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    p = WalkParams.model()
    offs, probs = p.step.offsets, p.step.probs
    steps = sample_steps(p, 200, 4096, make_rng(0))
    digits, top = step_digits(steps, 2)
    lo, hi = p.carry_bounds
    table = _jlogj_table(20)

    cases = {
        "evolve_mod_curve q=1e6+3 n=25": lambda m: m.evolve_mod_curve(2, offs, probs, 1_000_003, 25, -1.0),
        "carry_dp_log 4096 x n=200": lambda m: m.carry_dp_log(2, offs, probs, digits, top, lo, hi),
        "hhms_levels n=20": lambda m: m.hhms_levels(20, table),
    }
    backends = kernels.available_backends()
    print(f"{'kernel':34s}" + "".join(f"{name:>12s}" for name in backends) + f"{'speedup':>10s}")
    for label, fn in cases.items():
        t = {name: _best(lambda: fn(mod), args.repeat) for name, mod in backends.items()}
        speed = t["python"] / t["cython"] if "cython" in t else float("nan")
        print(f"{label:34s}" + "".join(f"{v:12.4f}" for v in t.values()) + f"{speed:10.1f}x")


if __name__ == "__main__":
    main()

"""Shared fixtures and brute-force oracles.

The oracles here deliberately avoid the package's evolution code: they
enumerate every step sequence in ``(supp mu)^n`` and count endpoints.
"""
from collections import Counter
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from affinewalk import kernels
from affinewalk.measures import StepLaw
from affinewalk.walk import WalkParams

ACCEPTANCE = {}


def enumerate_law(a, atoms, n):
    """``{x: Fraction}`` for ``X_n = sum_{i<n} b_i a**i`` by full enumeration."""
    offs = [b for b, _ in atoms]
    wts = dict(atoms)
    total = sum(wts.values())
    if n == 0:
        return {0: Fraction(1)}
    seqs = np.array(list(product(offs, repeat=n)), dtype=np.int64)
    x = seqs @ (a ** np.arange(n, dtype=np.int64))
    w = np.ones(len(seqs), dtype=object)
    for i in range(n):
        w = w * np.array([wts[int(b)] for b in seqs[:, i]], dtype=object)
    out = Counter()
    for xi, wi in zip(x.tolist(), w.tolist()):
        out[xi] += wi
    return {k: Fraction(v, total**n) for k, v in out.items()}


def enumerate_law_uniform(a, offsets, n):
    """Fast path for uniform steps: integer counts over ``len(offsets)**n``."""
    if n == 0:
        return {0: 1}, 1
    offs = np.array(offsets, dtype=np.int64)
    grids = np.meshgrid(*([offs] * n), indexing="ij")
    x = sum(g.ravel() * a**i for i, g in enumerate(grids))
    vals, counts = np.unique(x, return_counts=True)
    return dict(zip(vals.tolist(), counts.tolist())), len(offs) ** n


def reduce_oracle(law, q):
    out = [Fraction(0)] * q
    for x, m in law.items():
        out[x % q] += m
    return out


def half_tv_oracle(law, q):
    red = reduce_oracle(law, q)
    return sum(abs(m - Fraction(1, q)) for m in red) / 2


@pytest.fixture(scope="session")
def model():
    return WalkParams.model()


@pytest.fixture(scope="session")
def binary():
    return WalkParams(2, StepLaw.uniform([0, 1]))


@pytest.fixture(params=sorted(kernels.available_backends()))
def backend(request):
    return kernels.available_backends()[request.param]


def record_acceptance(number, ok, detail):
    ACCEPTANCE[number] = (bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops.

Every function here has a numpy twin in ``_fallback`` with the same signature
and the same results to rounding; ``affinewalk.kernels`` picks one at import.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport log, fabs, INFINITY

cnp.import_array()

ctypedef cnp.int64_t i64


def evolve_mod_curve(long a, const i64[:] offsets, const double[:] probs,
                     long q, long n, double stop_tv):
    """Push ``delta_0`` through ``x -> a x + b (mod q)`` for ``n`` steps.

    Returns ``(curve, dist)`` where ``curve[k] = (half_tv, q * l2_sq)`` of the
    law after ``k`` steps against uniform, and ``dist`` is the final law.
    Iteration stops early once ``half_tv <= stop_tv`` (pass a negative value
    to disable).
    """
    cdef Py_ssize_t nb = offsets.shape[0]
    cdef Py_ssize_t x, k, step, y, z, am
    cdef double u = 1.0 / q
    cdef double w, tv, l2, diff, ctv, cl2, t
    cdef cnp.ndarray[double, ndim=1] cur_a = np.zeros(q)
    cdef cnp.ndarray[double, ndim=1] nxt_a = np.zeros(q)
    cdef double[:] cur = cur_a
    cdef double[:] nxt = nxt_a
    cdef double[:] tmp
    cdef i64[:] bm = np.empty(nb, dtype=np.int64)
    out_a = np.empty((n + 1, 2))
    cdef double[:, :] out = out_a

    for k in range(nb):
        bm[k] = ((offsets[k] % q) + q) % q
    am = ((a % q) + q) % q
    cur[0] = 1.0
    out[0, 0] = 1.0 - u
    out[0, 1] = q * ((1.0 - u) * (1.0 - u) + (q - 1) * u * u)
    if q == 1:
        out[0, 0] = 0.0
        out[0, 1] = 0.0
    if out[0, 0] <= stop_tv:
        return out_a[:1], np.asarray(cur).copy()

    step = 0
    while step < n:
        nxt[:] = 0.0
        y = 0
        for x in range(q):
            w = cur[x]
            if w != 0.0:
                for k in range(nb):
                    z = y + bm[k]
                    if z >= q:
                        z -= q
                    nxt[z] += probs[k] * w
            y += am
            if y >= q:
                y -= q
        tmp = cur
        cur = nxt
        nxt = tmp
        step += 1
        # Kahan-compensated sums for the two distances
        tv = 0.0
        ctv = 0.0
        l2 = 0.0
        cl2 = 0.0
        for x in range(q):
            diff = cur[x] - u
            w = fabs(diff) - ctv
            t = tv + w
            ctv = (t - tv) - w
            tv = t
            w = diff * diff - cl2
            t = l2 + w
            cl2 = (t - l2) - w
            l2 = t
        out[step, 0] = 0.5 * tv
        out[step, 1] = q * l2
        if out[step, 0] <= stop_tv:
            break
    return out_a[:step + 1], np.asarray(cur).copy()


def carry_dp_log(long a, const i64[:] offsets, const double[:] probs,
                 const i64[:, :] digits, const i64[:] top, long lo, long hi):
    """Log point masses ``log mu_n({x})`` by the bounded-carry digit DP.

    Row ``s`` of ``digits`` holds the base-``a`` digits ``d_0..d_{n-1}`` of
    ``x_s`` (floor convention) and ``top[s] = floor(x_s / a**n)``. Carries
    live in ``[lo, hi]``. Unreachable sites give ``-inf``.
    """
    cdef Py_ssize_t S = digits.shape[0]
    cdef Py_ssize_t n = digits.shape[1]
    cdef Py_ssize_t nb = offsets.shape[0]
    cdef Py_ssize_t W = hi - lo + 1
    cdef Py_ssize_t s, i, k, j, idx
    cdef long long c, t, c2, d
    cdef double tot, logscale, w
    cdef bint dead
    cdef double[:] cur = np.zeros(W)
    cdef double[:] nxt = np.zeros(W)
    cdef double[:] tmp
    out_a = np.empty(S)
    cdef double[:] out = out_a

    for s in range(S):
        cur[:] = 0.0
        cur[-lo] = 1.0
        logscale = 0.0
        dead = False
        for i in range(n):
            d = digits[s, i]
            nxt[:] = 0.0
            for k in range(W):
                w = cur[k]
                if w == 0.0:
                    continue
                c = k + lo
                for j in range(nb):
                    t = c + d - offsets[j]
                    if t % a == 0:
                        c2 = t / a
                        nxt[c2 - lo] += probs[j] * w
            tot = 0.0
            for k in range(W):
                tot += nxt[k]
            if tot == 0.0:
                dead = True
                break
            logscale += log(tot)
            for k in range(W):
                nxt[k] /= tot
            tmp = cur
            cur = nxt
            nxt = tmp
        idx = -top[s] - lo
        if dead or idx < 0 or idx >= W or cur[idx] == 0.0:
            out[s] = -INFINITY
        else:
            out[s] = log(cur[idx]) + logscale
    return out_a


def hhms_levels(int n_max, const double[:] jlogj):
    """Level sums of ``j log j`` over coprime ``i < j`` by Euclid depth.

    Walks the predecessor tree rooted at ``(1, 2)`` depth first. A node
    ``(i, j)`` at depth ``d`` has children ``(j, i+j)`` and ``(i, i+j)`` at
    depth ``d+1``; both share ``j' = i + j`` so level ``d+1`` is accumulated
    from the parents. ``jlogj[m] = m log m`` is a lookup table; larger ``m``
    fall back to ``log``.

    Returns ``(sums, counts, max_j)`` indexed by level ``0..n_max``.
    """
    cdef Py_ssize_t T = jlogj.shape[0]
    sums_a = np.zeros(n_max + 1)
    comp_a = np.zeros(n_max + 1)
    counts_a = np.zeros(n_max + 1, dtype=np.int64)
    maxj_a = np.zeros(n_max + 1, dtype=np.int64)
    cdef double[:] sums = sums_a
    cdef double[:] comp = comp_a
    cdef i64[:] counts = counts_a
    cdef i64[:] maxj = maxj_a
    if n_max < 1:
        return sums_a, counts_a, maxj_a

    sums[1] = 2.0 * log(2.0)
    counts[1] = 1
    maxj[1] = 2
    if n_max < 2:
        return sums_a, counts_a, maxj_a

    cdef i64[:] si = np.empty(2 * n_max + 4, dtype=np.int64)
    cdef i64[:] sj = np.empty(2 * n_max + 4, dtype=np.int64)
    cdef int[:] sd = np.empty(2 * n_max + 4, dtype=np.intc)
    cdef Py_ssize_t sp = 0
    cdef long long i, j, m
    cdef int dep
    cdef double f, y, t

    si[0] = 1
    sj[0] = 2
    sd[0] = 1
    sp = 1
    while sp > 0:
        sp -= 1
        i = si[sp]
        j = sj[sp]
        dep = sd[sp]
        m = i + j
        if m < T:
            f = 2.0 * jlogj[m]
        else:
            f = 2.0 * m * log(<double>m)
        y = f - comp[dep + 1]
        t = sums[dep + 1] + y
        comp[dep + 1] = (t - sums[dep + 1]) - y
        sums[dep + 1] = t
        counts[dep + 1] += 2
        if m > maxj[dep + 1]:
            maxj[dep + 1] = m
        if dep + 1 < n_max:
            si[sp] = j
            sj[sp] = m
            sd[sp] = dep + 1
            si[sp + 1] = i
            sj[sp + 1] = m
            sd[sp + 1] = dep + 1
            sp += 2
    return sums_a, counts_a, maxj_a

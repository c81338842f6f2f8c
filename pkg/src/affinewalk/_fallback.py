"""Pure-numpy versions of the compiled kernels in ``_kernels.pyx``.

Signatures and results match the Cython module; see its docstrings.
"""
import numpy as np

_CHUNK = 1 << 20


def evolve_mod_curve(a, offsets, probs, q, n, stop_tv):
    q = int(q)
    u = 1.0 / q
    cur = np.zeros(q)
    cur[0] = 1.0
    image = (int(a) * np.arange(q, dtype=np.int64)) % q
    shifts = [int(b) % q for b in offsets]
    rows = [(0.0, 0.0) if q == 1 else (1.0 - u, float(q - 1))]
    if rows[0][0] <= stop_tv:
        return np.array(rows), cur
    for _ in range(int(n)):
        pushed = np.bincount(image, weights=cur, minlength=q)
        nxt = np.zeros(q)
        for b, w in zip(shifts, probs):
            nxt += w * np.roll(pushed, b)
        cur = nxt
        diff = cur - u
        rows.append((0.5 * float(np.abs(diff).sum()), q * float(diff @ diff)))
        if rows[-1][0] <= stop_tv:
            break
    return np.array(rows), cur


def carry_dp_log(a, offsets, probs, digits, top, lo, hi):
    a = int(a)
    digits = np.asarray(digits, dtype=np.int64)
    S, n = digits.shape
    W = hi - lo + 1
    carries = np.arange(lo, hi + 1, dtype=np.int64)
    cur = np.zeros((S, W))
    cur[:, -lo] = 1.0
    logscale = np.zeros(S)
    alive = np.ones(S, dtype=bool)
    rows = np.arange(S)
    for i in range(n):
        d = digits[:, i]
        nxt = np.zeros((S, W))
        for k, c in enumerate(carries):
            col = cur[:, k]
            if not col.any():
                continue
            for b, w in zip(offsets, probs):
                t = c + d - int(b)
                ok = (t % a == 0) & (col > 0)
                if not ok.any():
                    continue
                tgt = t[ok] // a - lo
                assert tgt.min() >= 0 and tgt.max() < W, "carry left its window"
                nxt[rows[ok], tgt] += w * col[ok]
        tot = nxt.sum(axis=1)
        alive &= tot > 0
        safe = np.where(tot > 0, tot, 1.0)
        logscale += np.log(safe)
        cur = nxt / safe[:, None]
    idx = -np.asarray(top, dtype=np.int64) - lo
    inside = alive & (idx >= 0) & (idx < W)
    out = np.full(S, -np.inf)
    vals = cur[rows[inside], idx[inside]]
    with np.errstate(divide="ignore"):
        out[inside] = np.where(vals > 0, np.log(np.where(vals > 0, vals, 1.0)) + logscale[inside], -np.inf)
    return out


def hhms_levels(n_max, jlogj):
    n_max = int(n_max)
    jlogj = np.asarray(jlogj)
    sums = np.zeros(n_max + 1)
    counts = np.zeros(n_max + 1, dtype=np.int64)
    maxj = np.zeros(n_max + 1, dtype=np.int64)
    if n_max < 1:
        return sums, counts, maxj
    sums[1] = 2.0 * np.log(2.0)
    counts[1] = 1
    maxj[1] = 2
    if n_max < 2:
        return sums, counts, maxj
    T = len(jlogj)

    def f(m):
        small = m < T
        out = np.empty(len(m))
        out[small] = jlogj[m[small]]
        big = m[~small].astype(float)
        out[~small] = big * np.log(big)
        return out

    def walk(i, j, depth):
        if len(i) > _CHUNK:
            half = len(i) // 2
            walk(i[:half], j[:half], depth)
            walk(i[half:], j[half:], depth)
            return
        m = i + j
        sums[depth + 1] += 2.0 * float(np.sum(f(m)))
        counts[depth + 1] += 2 * len(m)
        maxj[depth + 1] = max(maxj[depth + 1], int(m.max()))
        if depth + 1 < n_max:
            # children (j, i+j) and (i, i+j)
            walk(np.concatenate([j, i]), np.concatenate([m, m]), depth + 1)

    walk(np.array([1], dtype=np.int64), np.array([2], dtype=np.int64), 1)
    return sums, counts, maxj

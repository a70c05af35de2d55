"""Hot loops, compiled with numba when available.

Set ``FOLKREG_DISABLE_NUMBA=1`` to force the pure-numpy path. Both paths
are always importable as ``*_numba`` / ``*_numpy`` so tests and the
benchmark can compare them directly; the unsuffixed names are the ones
selected for this process.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("FOLKREG_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _DISABLED:
        raise ImportError
    import numba

    njit = numba.njit(cache=True, nogil=True)
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    HAVE_NUMBA = False

    def njit(f):
        return f


# --------------------------------------------------------------------------
# exhaustive regularity scan
#
# Walks every subset X' of side A in Gray-code order, keeping the per-vertex
# counts c[y] = |N(y) & X'| up to date with one row add/subtract. For a fixed
# X' and a fixed size t, the extreme values of e(X', Y') over |Y'| = t are
# the sums of the t largest / t smallest counts, so the B side never needs
# enumerating. Deviations are compared as integers scaled by
# D = lcm(1..a) * lcm(1..b), which every s*t divides.
#
# Result tuple: (found, dev_scaled, xmask, t, side); side 0 = top-t counts,
# side 1 = bottom-t counts. Ties: larger deviation, then larger |X'||Y'|,
# then smaller xmask, smaller t, side 0 first.
# --------------------------------------------------------------------------


def _gray_scan_py(adj, E, D, eps_num, eps_den):
    a, b = adj.shape
    ab = a * b
    c = np.zeros(b, np.int64)
    xmask = 0
    s = 0
    best_dev = -1
    best_area = 0
    best_x = 0
    best_t = 0
    best_side = 0
    for g in range(1, 1 << a):
        bit = 0
        tmp = g
        while tmp & 1 == 0:
            tmp >>= 1
            bit += 1
        if (xmask >> bit) & 1:
            xmask ^= 1 << bit
            s -= 1
            for y in range(b):
                c[y] -= adj[bit, y]
        else:
            xmask |= 1 << bit
            s += 1
            for y in range(b):
                c[y] += adj[bit, y]
        if s * eps_den <= eps_num * a:
            continue
        srt = np.sort(c)
        lo = 0
        hi = 0
        for t in range(1, b + 1):
            lo += srt[t - 1]
            hi += srt[b - t]
            if t * eps_den <= eps_num * b:
                continue
            st = s * t
            base = E * st
            for side in range(2):
                e = hi if side == 0 else lo
                raw = abs(e * ab - base)
                if raw * eps_den <= eps_num * st * ab:
                    continue
                dev = raw * (D // st)
                better = False
                if dev > best_dev:
                    better = True
                elif dev == best_dev:
                    if st > best_area:
                        better = True
                    elif st == best_area:
                        if xmask < best_x:
                            better = True
                        elif xmask == best_x:
                            if t < best_t or (t == best_t and side < best_side):
                                better = True
                if better:
                    best_dev = dev
                    best_area = st
                    best_x = xmask
                    best_t = t
                    best_side = side
    return best_dev >= 0, best_dev, best_x, best_t, best_side


gray_scan_numba = njit(_gray_scan_py) if HAVE_NUMBA else None


def gray_scan_numpy(adj, E, D, eps_num, eps_den):
    """Vectorised equivalent of the Gray-code scan (same tie-breaking)."""
    adj = np.asarray(adj, dtype=np.int64)
    a, b = adj.shape
    ab = a * b
    masks = np.arange(1 << a, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(a)) & 1).astype(np.int64)
    s = bits.sum(axis=1)
    counts = bits @ adj
    srt = np.sort(counts, axis=1)
    lo = np.cumsum(srt, axis=1)
    hi = np.cumsum(srt[:, ::-1], axis=1)
    t = np.arange(1, b + 1, dtype=np.int64)
    st = s[:, None] * t[None, :]
    ok = (s[:, None] * eps_den > eps_num * a) & (t[None, :] * eps_den > eps_num * b)
    best = None
    for side, e in ((0, hi), (1, lo)):
        raw = np.abs(e * ab - E * st)
        admissible = ok & (raw * eps_den > eps_num * st * ab)
        if not admissible.any():
            continue
        safe_st = np.where(st > 0, st, 1)
        dev = np.where(admissible, raw * (D // safe_st), -1)
        rows, cols = np.nonzero(admissible)
        keys = np.lexsort(
            (
                np.full(rows.size, side),
                t[cols],
                masks[rows],
                -st[rows, cols],
                -dev[rows, cols],
            )
        )
        i = keys[0]
        cand = (int(dev[rows[i], cols[i]]), int(st[rows[i], cols[i]]), int(masks[rows[i]]), int(t[cols[i]]), side)
        if best is None or (-cand[0], -cand[1], cand[2], cand[3], cand[4]) < (-best[0], -best[1], best[2], best[3], best[4]):
            best = cand
    if best is None:
        return False, -1, 0, 0, 0
    return True, best[0], best[2], best[3], best[4]


# --------------------------------------------------------------------------
# class-pair edge counts
# --------------------------------------------------------------------------


def _class_pair_counts_py(adj, labels, nclass):
    n = adj.shape[0]
    out = np.zeros((nclass, nclass), np.int64)
    for u in range(n):
        lu = labels[u]
        if lu < 0:
            continue
        for v in range(n):
            if adj[u, v]:
                lv = labels[v]
                if lv >= 0:
                    out[lu, lv] += 1
    return out


class_pair_counts_numba = njit(_class_pair_counts_py) if HAVE_NUMBA else None


def class_pair_counts_numpy(adj, labels, nclass):
    labels = np.asarray(labels)
    keep = labels >= 0
    onehot = np.zeros((adj.shape[0], nclass), dtype=np.int64)
    onehot[np.nonzero(keep)[0], labels[keep]] = 1
    return onehot.T @ adj.astype(np.int64) @ onehot


# --------------------------------------------------------------------------
# K_p-free maximum: branch and bound over edges of K_p(k)
#
# clique_ptr/clique_idx is a CSR list of the transversal cliques through
# each edge; ``missing[q]`` counts edges of clique q not yet included, so an
# include that would drive it to zero completes a K_p and is pruned.
# --------------------------------------------------------------------------


def _kp_free_max_py(n_edges, clique_size, n_cliques, ptr, idx):
    missing = np.full(n_cliques, clique_size, np.int64)
    phase = np.zeros(n_edges + 1, np.int64)
    inc = np.zeros(n_edges + 1, np.int64)
    best = 0
    count = 0
    pos = 0
    while pos >= 0:
        if pos == n_edges:
            if count > best:
                best = count
            pos -= 1
            continue
        ph = phase[pos]
        if ph == 0:
            phase[pos] = 1
            if count + (n_edges - pos) > best:
                ok = True
                for q in range(ptr[pos], ptr[pos + 1]):
                    if missing[idx[q]] == 1:
                        ok = False
                        break
                if ok:
                    for q in range(ptr[pos], ptr[pos + 1]):
                        missing[idx[q]] -= 1
                    inc[pos] = 1
                    count += 1
                    pos += 1
        elif ph == 1:
            phase[pos] = 2
            if inc[pos] == 1:
                for q in range(ptr[pos], ptr[pos + 1]):
                    missing[idx[q]] += 1
                inc[pos] = 0
                count -= 1
            if count + (n_edges - pos - 1) > best:
                pos += 1
        else:
            phase[pos] = 0
            pos -= 1
    return best


kp_free_max_numba = njit(_kp_free_max_py) if HAVE_NUMBA else None
kp_free_max_numpy = _kp_free_max_py


if HAVE_NUMBA:
    gray_scan = gray_scan_numba
    class_pair_counts = class_pair_counts_numba
    kp_free_max = kp_free_max_numba
else:
    gray_scan = gray_scan_numpy
    class_pair_counts = class_pair_counts_numpy
    kp_free_max = kp_free_max_numpy


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"

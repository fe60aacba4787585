"""Compiled depth-first branch-and-bound over chains with a fixed start point.

The kernel enumerates chains ``x1, x2, ..., xk`` in lexicographic order of
their index sequence. Floating-point operations on the path sum, spacing
ratio and stretch are performed in exactly the same order as the naive
enumeration in :mod:`snowcert.oracle`, so both routes produce bit-identical
stretches for the same chain.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# float noise allowance in the pruning bound (relative)
_PRUNE_MARGIN = 1e-12
_ROUND_DOWN = 1.0 - 4.0 * np.finfo(np.float64).eps
_ROUND_UP = 1.0 + 4.0 * np.finfo(np.float64).eps


@njit(cache=True, nogil=True)
def _stretch_lower_bound(path, a, d1max, m, lo, hi, slack):
    # stretch = (path + R) / E with R in [m*lo, m*hi], E <= min(d1max, a + R + m*slack)
    r_lo = m * lo
    r_hi = m * hi
    extra = a + m * slack
    best = np.inf
    r_mid = d1max - extra
    if r_mid < r_lo:
        r_mid = r_lo
    elif r_mid > r_hi:
        r_mid = r_hi
    for r in (r_lo, r_hi, r_mid):
        den = extra + r
        if d1max < den:
            den = d1max
        v = (path + r) / den
        if v < best:
            best = v
    return best


@njit(cache=True, nogil=True)
def search_from(d, rowmax, x1, k, ratio_cap, best0, tie_tol, slack, node_cap, distinct):
    """Exhaustive pruned search over chains starting at ``x1``.

    Returns ``(best, cand_stretch, cand_chains, n_cand, nodes, leaves, exhausted)``
    where the candidate buffers hold, in discovery (= lexicographic) order,
    every complete chain whose stretch is within ``tie_tol`` of the running
    minimum at the time it was found and still within ``tie_tol`` of the
    final local minimum.
    """
    n = d.shape[0]
    chain = np.empty(k, np.int64)
    nxt = np.zeros(k, np.int64)
    path = np.zeros(k)
    mn = np.zeros(k)
    mx = np.zeros(k)
    chain[0] = x1
    mn[0] = np.inf
    mx[0] = 0.0

    cap = 16
    cand_s = np.empty(cap)
    cand_c = np.empty((cap, k), np.int64)
    n_cand = 0

    best = best0
    nodes = 0
    leaves = 0
    exhausted = False
    d1max = rowmax[x1]
    depth = 0
    nxt[1] = 0
    while depth >= 0:
        pos = depth + 1
        if nxt[pos] >= n:
            depth -= 1
            continue
        y = nxt[pos]
        nxt[pos] += 1
        c = chain[depth]
        if y == c:
            continue
        if distinct:
            seen = False
            for t in range(pos):
                if chain[t] == y:
                    seen = True
                    break
            if seen:
                continue
        s = d[c, y]
        nmn = mn[depth]
        if s < nmn:
            nmn = s
        nmx = mx[depth]
        if s > nmx:
            nmx = s
        if nmx / nmn > ratio_cap:
            continue
        p = path[depth] + s
        if pos == k - 1:
            if y == x1:
                continue
            st = p / d[x1, y]
            leaves += 1
            if st <= best + tie_tol:
                if st < best:
                    best = st
                    # drop candidates that fell out of the tie window
                    w = 0
                    for t in range(n_cand):
                        if cand_s[t] <= best + tie_tol:
                            cand_s[w] = cand_s[t]
                            cand_c[w, :] = cand_c[t, :]
                            w += 1
                    n_cand = w
                if n_cand == cap:
                    cap *= 2
                    ns = np.empty(cap)
                    nc = np.empty((cap, k), np.int64)
                    ns[:n_cand] = cand_s[:n_cand]
                    nc[:n_cand, :] = cand_c[:n_cand, :]
                    cand_s = ns
                    cand_c = nc
                cand_s[n_cand] = st
                for t in range(pos):
                    cand_c[n_cand, t] = chain[t]
                cand_c[n_cand, pos] = y
                n_cand += 1
            continue

        nodes += 1
        if nodes > node_cap:
            exhausted = True
            break
        if best < np.inf:
            m = k - 1 - pos
            lo = nmx / ratio_cap * _ROUND_DOWN
            hi = nmn * ratio_cap * _ROUND_UP
            a = d[x1, y]
            lb = _stretch_lower_bound(p, a, d1max, m, lo, hi, slack)
            if lb > (best + tie_tol) * (1.0 + _PRUNE_MARGIN):
                continue
        chain[pos] = y
        path[pos] = p
        mn[pos] = nmn
        mx[pos] = nmx
        depth = pos
        if pos + 1 < k:
            nxt[pos + 1] = 0
    return best, cand_s[:n_cand].copy(), cand_c[:n_cand].copy(), n_cand, nodes, leaves, exhausted

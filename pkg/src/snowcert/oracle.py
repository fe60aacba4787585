"""Naive full enumeration of chains, used as an independent cross-check.

Every index sequence of length ``k`` with distinct consecutive entries is
generated (``n * (n-1)**(k-1)`` of them), filtered for admissibility and
scored. No pruning, no shared code with the branch-and-bound kernel.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import NoAdmissibleChain

TIE_TOL = 1e-12
RATIO_TOL = 1e-12


def _chains_from(n: int, k: int, x1: int) -> np.ndarray:
    # offsets in [1, n-1] added mod n guarantee consecutive entries differ
    steps = np.array(list(itertools.product(range(1, n), repeat=k - 1)), dtype=np.int64)
    steps = steps.reshape(-1, k - 1)
    out = np.empty((steps.shape[0], k), dtype=np.int64)
    out[:, 0] = x1
    for j in range(1, k):
        out[:, j] = (out[:, j - 1] + steps[:, j - 1]) % n
    return out


def enumerate_best(d, k: int, epsilon: float, distinct: bool = False):
    """Return ``(min_stretch, argmin_chain, n_admissible)`` by brute force.

    The argmin is the lexicographically smallest chain whose stretch lies
    within ``TIE_TOL`` of the global minimum.
    """
    d = np.asarray(d, dtype=np.float64)
    n = d.shape[0]
    if k > n or k < 2:
        raise NoAdmissibleChain(f"k={k} not in [2, {n}]")
    ratio_cap = (1.0 + epsilon) + RATIO_TOL
    stretches = []
    chains = []
    total = 0
    for x1 in range(n):
        c = _chains_from(n, k, x1)
        c = c[c[:, -1] != x1]
        if distinct:
            srt = np.sort(c, axis=1)
            c = c[np.all(srt[:, 1:] != srt[:, :-1], axis=1)]
        gaps = d[c[:, :-1], c[:, 1:]]
        ratio = gaps.max(axis=1) / gaps.min(axis=1)
        keep = ratio <= ratio_cap
        c, gaps = c[keep], gaps[keep]
        if not len(c):
            continue
        path = gaps[:, 0].copy()
        for j in range(1, k - 1):
            path = path + gaps[:, j]
        st = path / d[c[:, 0], c[:, -1]]
        total += len(c)
        stretches.append(st)
        chains.append(c)
    if not total:
        raise NoAdmissibleChain("no admissible chain")
    st = np.concatenate(stretches)
    ch = np.concatenate(chains)
    best = st.min()
    tied = ch[st <= best + TIE_TOL]
    order = np.lexsort(tied.T[::-1])
    return float(best), tuple(int(v) for v in tied[order[0]]), total

import itertools

import numpy as np
import pytest

from snowcert.errors import NoAdmissibleChain
from snowcert.generators import random_metric
from snowcert.oracle import enumerate_best

from conftest import line_points


def test_line3(line3):
    st, chain, count = enumerate_best(line3.d, 3, 0.0)
    assert st == 1.0
    assert chain == (0, 1, 2)


def test_counts_match_itertools():
    # brute force with plain Python loops as a check on the vectorised oracle
    m = random_metric(5, seed=4)
    d = m.d
    k, eps = 4, 0.3
    best, best_chain, count = np.inf, None, 0
    results = []
    for c in itertools.product(range(5), repeat=k):
        if any(a == b for a, b in zip(c, c[1:])) or c[0] == c[-1]:
            continue
        gaps = [d[a, b] for a, b in zip(c, c[1:])]
        if max(gaps) / min(gaps) > (1 + eps) + 1e-12:
            continue
        count += 1
        path = 0.0
        for g in gaps:
            path = path + g
        results.append((path / d[c[0], c[-1]], c))
    best = min(s for s, _ in results)
    best_chain = min(c for s, c in results if s <= best + 1e-12)
    assert enumerate_best(d, k, eps) == (best, best_chain, count)


def test_no_admissible():
    m = line_points([0, 1, 3])
    # 3-chains: all spacing pairs among {1, 2, 3} differ unless revisiting
    with pytest.raises(NoAdmissibleChain):
        enumerate_best(m.d, 3, 0.0, distinct=True)
    with pytest.raises(NoAdmissibleChain):
        enumerate_best(m.d, 4, 0.0)

"""Sweeps over (k, epsilon), triple audits and snowflake comparisons."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .chains import SearchBudget, best_alpha
from .errors import ParameterError, ReportInvariantError, SnowcertError
from .metric import DistanceMatrix, snowflake_transform

DEFAULT_KS = (3, 4, 5, 8)
DEFAULT_EPSILONS = (0.0, 0.1, 0.25, 1.0)


def space_id(m: DistanceMatrix, spec: Optional[dict] = None) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(m.d, dtype="<f8").tobytes())
    if spec is None and m.meta:
        spec = m.meta.get("generator")
    h.update(json.dumps(spec, sort_keys=True).encode())
    return h.hexdigest()[:16]


@dataclass(frozen=True)
class ScanRecord:
    k: int
    epsilon: float
    alpha_star: Optional[float]
    certified: bool
    argmin_chain: Optional[tuple]
    chains_examined: int
    wall_time: float
    error: Optional[dict] = None
    mode: str = "exact"

    def to_dict(self, wall_time: bool = True) -> dict:
        out = {
            "k": self.k,
            "mode": self.mode,
            "epsilon": self.epsilon,
            "alpha_star": self.alpha_star,
            "certified": self.certified,
            "argmin_chain": None if self.argmin_chain is None else list(self.argmin_chain),
            "chains_examined": self.chains_examined,
            "error": self.error,
        }
        if wall_time:
            out["wall_time"] = self.wall_time
        return out


@dataclass(frozen=True)
class AlphaReport:
    space_id: str
    grid: tuple
    triple_audit: Optional[dict] = None

    def __post_init__(self):
        check_report(self.grid)

    def to_dict(self, wall_time: bool = True) -> dict:
        return {
            "space_id": self.space_id,
            "grid": [r.to_dict(wall_time) for r in self.grid],
            "triple_audit": self.triple_audit,
        }

    def to_csv(self, wall_time: bool = True) -> str:
        buf = io.StringIO()
        cols = ["k", "epsilon", "mode", "alpha_star", "certified", "argmin_chain",
                "chains_examined", "error"]
        if wall_time:
            cols.append("wall_time")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in self.grid:
            row = r.to_dict(wall_time)
            row["argmin_chain"] = "" if r.argmin_chain is None else "-".join(map(str, r.argmin_chain))
            row["error"] = "" if r.error is None else r.error["error"]
            row["alpha_star"] = "" if r.alpha_star is None else format(r.alpha_star, ".17g")
            w.writerow([row[c] for c in cols])
        return buf.getvalue()


def check_report(grid: Sequence[ScanRecord]) -> None:
    """Enforce the report invariants.

    Only exact-mode records may be certified, and among certified records
    with equal ``k`` the optimum may not increase with ``epsilon`` (the set of
    admissible chains only grows). Beam records are upper bounds and are not
    held to the monotonicity rule.
    """
    by_k: dict = {}
    for r in grid:
        if r.certified and r.mode != "exact":
            raise ReportInvariantError(f"{r.mode} record marked certified at k={r.k}")
        if r.certified and r.alpha_star is None:
            raise ReportInvariantError(f"certified record without value at k={r.k}")
        if r.certified and r.alpha_star is not None:
            by_k.setdefault(r.k, []).append(r)
    for k, rows in by_k.items():
        rows = sorted(rows, key=lambda r: r.epsilon)
        for a, b in zip(rows, rows[1:]):
            if b.alpha_star > a.alpha_star:
                raise ReportInvariantError(
                    f"alpha_star increases from eps={a.epsilon} to eps={b.epsilon} at k={k}"
                )


def _cell(m, k, eps, budget, threads):
    t0 = time.perf_counter()
    try:
        res = best_alpha(m, k, eps, budget, threads)
    except SnowcertError as exc:
        return ScanRecord(
            k, eps, None, False, None, 0, time.perf_counter() - t0, exc.to_dict(),
            budget.mode,
        )
    return ScanRecord(
        k, eps, res.alpha_star, res.certified, res.chain.indices,
        res.chains_examined, time.perf_counter() - t0, None, res.mode,
    )


def scan(
    m: DistanceMatrix,
    ks: Sequence[int] = DEFAULT_KS,
    epsilons: Sequence[float] = DEFAULT_EPSILONS,
    budget: Optional[SearchBudget] = None,
    threads: Optional[int] = None,
    alpha_probe: Optional[float] = None,
) -> AlphaReport:
    """One record per ``(k, epsilon)``; cell errors are stored, not raised.

    Cells are independent. With ``threads > 1`` they are evaluated
    concurrently and collated in grid order, each cell searching
    single-threaded.
    """
    budget = budget or SearchBudget()
    cells = [(int(k), float(e)) for k in ks for e in epsilons]
    threads = threads or 1
    if threads > 1 and len(cells) > 1:
        with ThreadPoolExecutor(threads) as pool:
            grid = list(pool.map(lambda c: _cell(m, c[0], c[1], budget, 1), cells))
    else:
        grid = [_cell(m, k, e, budget, threads) for k, e in cells]
    audit = None
    if alpha_probe is not None:
        audit = {"alpha_probe": alpha_probe, "fraction": triple_audit(m, alpha_probe)}
    return AlphaReport(space_id(m), tuple(grid), audit)


def triple_audit(m: DistanceMatrix, alpha_probe: float, rtol: float = 1e-12) -> float:
    """Fraction of ordered triples of distinct points with rough angle below ``2**alpha - 1``.

    For a triple ``(x, y, z)`` the middle point is ``z``; the test is
    ``d(x,y) <= max(d(x,z) + b d(z,y), b d(x,z) + d(z,y))``.
    """
    if not 0.0 < alpha_probe < 1.0:
        raise ParameterError(f"alpha_probe must lie in (0, 1), got {alpha_probe}")
    beta = 2.0**alpha_probe - 1.0
    d = m.d
    n = m.n
    if n < 3:
        raise ParameterError("triple audit needs at least 3 points")
    passed = 0
    for z in range(n):
        xz = d[:, z][:, None]
        zy = d[z, :][None, :]
        bound = np.maximum(xz + beta * zy, beta * xz + zy)
        ok = d <= bound * (1.0 + rtol)
        ok[z, :] = False
        ok[:, z] = False
        np.fill_diagonal(ok, False)
        passed += int(ok.sum())
    return passed / (n * (n - 1) * (n - 2))


@dataclass(frozen=True)
class TransformRow:
    alpha_s: float
    alpha_star: Optional[float]
    collinear_model: float
    chain: Optional[tuple] = None
    error: Optional[dict] = None

    def to_dict(self) -> dict:
        return {
            "alpha_s": self.alpha_s,
            "alpha_star": self.alpha_star,
            "collinear_model": self.collinear_model,
            "chain": None if self.chain is None else list(self.chain),
            "error": self.error,
        }


def compare_transform(
    m: DistanceMatrix,
    alphas: Sequence[float],
    k: int,
    epsilon: float,
    budget: Optional[SearchBudget] = None,
    threads: Optional[int] = None,
) -> list:
    """``alpha_star`` of ``snowflake_transform(m, a)`` for each ``a``.

    ``collinear_model`` is ``(k-1) ** (1 - a) - 1``, the value attained by an
    equispaced straight chain after snowflaking. It is a reference column
    only; it equals ``alpha_star`` when the optimal chain of ``m`` is such a
    chain.
    """
    rows = []
    for a in alphas:
        ref = (k - 1) ** (1.0 - a) - 1.0
        try:
            res = best_alpha(snowflake_transform(m, a), k, epsilon, budget, threads)
        except SnowcertError as exc:
            rows.append(TransformRow(a, None, ref, None, exc.to_dict()))
            continue
        rows.append(TransformRow(a, res.alpha_star, ref, res.chain.indices))
    return rows

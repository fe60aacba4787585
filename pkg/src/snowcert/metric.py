"""Finite metric spaces and the transforms acting on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .errors import (
    AlphaOutOfRange,
    Asymmetric,
    BetaOutOfRange,
    DuplicatePoints,
    IndexOutOfRange,
    NegativeEntry,
    NonFiniteEntry,
    NonpositiveScale,
    NonzeroDiagonal,
    NotSquare,
    ParameterError,
    SizeOverflow,
    TriangleViolation,
)

DEFAULT_TOL_REL = 1e-9
# above this size validate() switches to sampled triangle checks by default
EXACT_TRIANGLE_LIMIT = 2000
DEFAULT_TRIANGLE_SAMPLES = 2_000_000
DEFAULT_PRODUCT_CAP = 4096


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """A validated finite metric space.

    Instances are immutable: ``d`` is a read-only float64 array. Build them
    with :func:`validate` (or a transform of an existing instance), not by
    calling the constructor on untrusted data.
    """

    d: np.ndarray
    labels: Optional[tuple] = None
    tol_rel: float = DEFAULT_TOL_REL
    meta: Optional[dict] = field(default=None, repr=False)
    _slack: Optional[float] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.d.shape[0]

    def __len__(self):
        return self.n

    @cached_property
    def max_entry(self) -> float:
        return float(self.d.max()) if self.n else 0.0

    @cached_property
    def min_offdiag(self) -> float:
        if self.n < 2:
            return math.inf
        return float(self.d[~np.eye(self.n, dtype=bool)].min())

    @cached_property
    def triangle_slack(self) -> float:
        """Largest amount by which any triangle inequality fails (>= 0).

        Exact O(n^3) scan for moderate sizes. Above ``EXACT_TRIANGLE_LIMIT``
        the tolerance bound ``tol_rel * max_entry`` is returned instead, which
        keeps the search bounds conservative.
        """
        if self._slack is not None:
            return self._slack
        if self.n > EXACT_TRIANGLE_LIMIT:
            return self.tol_rel * self.max_entry
        worst, _ = _triangle_scan(self.d)
        return max(worst, 0.0)

    def submatrix(self, indices: Sequence[int]) -> "DistanceMatrix":
        idx = np.asarray(indices, dtype=np.int64)
        if len(set(idx.tolist())) != len(idx):
            raise ParameterError("submatrix indices must be distinct")
        labels = None if self.labels is None else tuple(self.labels[i] for i in idx)
        return _trusted(self.d[np.ix_(idx, idx)], labels, self.tol_rel)

    def equals(self, other: "DistanceMatrix") -> bool:
        return (
            self.n == other.n
            and np.array_equal(self.d, other.d)
            and self.labels == other.labels
        )


def _trusted(d, labels=None, tol_rel=DEFAULT_TOL_REL, meta=None, slack=None):
    arr = np.array(d, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return DistanceMatrix(
        arr, None if labels is None else tuple(labels), tol_rel, meta, slack
    )


def _triangle_scan(d: np.ndarray):
    """Return (max violation, (i, j, m)) over all ordered triples."""
    n = d.shape[0]
    worst = -math.inf
    where = (0, 0, 0)
    for m in range(n):
        viol = d - (d[:, m : m + 1] + d[m : m + 1, :])
        flat = int(np.argmax(viol))
        v = float(viol.flat[flat])
        if v > worst:
            worst = v
            where = (flat // n, flat % n, m)
    return worst, where


def validate(
    raw,
    tol_rel: float = DEFAULT_TOL_REL,
    labels: Optional[Sequence[str]] = None,
    triangle: str = "auto",
    samples: int = DEFAULT_TRIANGLE_SAMPLES,
    seed: int = 0,
    meta: Optional[dict] = None,
) -> DistanceMatrix:
    """Check the metric axioms and return an immutable :class:`DistanceMatrix`.

    Parameters
    ----------
    raw : array_like
        Square matrix of pairwise distances.
    tol_rel : float
        Symmetry and triangle inequality are checked up to
        ``tol_rel * max(raw)``.
    labels : sequence of str, optional
        One tag per point.
    triangle : {"auto", "exact", "sampled"}
        ``auto`` is exact up to 2000 points and sampled above.
    samples, seed
        Number of random triples and RNG seed for the sampled mode.

    Raises
    ------
    NotSquare, NonFiniteEntry, NegativeEntry, NonzeroDiagonal, Asymmetric,
    DuplicatePoints, TriangleViolation
    """
    if tol_rel < 0:
        raise ParameterError("tol_rel must be nonnegative")
    d = np.array(raw, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {d.shape}")
    n = d.shape[0]
    if labels is not None:
        labels = [str(s) for s in labels]
        if len(labels) != n:
            raise ParameterError(f"{len(labels)} labels for {n} points")

    bad = np.argwhere(~np.isfinite(d))
    if len(bad):
        raise NonFiniteEntry(*map(int, bad[0]))
    bad = np.argwhere(d < 0)
    if len(bad):
        raise NegativeEntry(*map(int, bad[0]))
    scale = float(d.max()) if n else 0.0
    tol = tol_rel * scale
    diag = np.abs(np.diag(d))
    bad = np.flatnonzero(diag > tol)
    if len(bad):
        raise NonzeroDiagonal(int(bad[0]))
    gap = np.abs(d - d.T)
    bad = np.argwhere(gap > tol)
    if len(bad):
        i, j = map(int, bad[0])
        raise Asymmetric(i, j, float(gap[i, j]))
    if not np.array_equal(d, d.T):
        d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    off = ~np.eye(n, dtype=bool)
    bad = np.argwhere((d == 0) & off)
    if len(bad):
        raise DuplicatePoints(*map(int, bad[0]))

    if triangle not in ("auto", "exact", "sampled"):
        raise ParameterError(f"unknown triangle mode {triangle!r}")
    exact = triangle == "exact" or (triangle == "auto" and n <= EXACT_TRIANGLE_LIMIT)
    if exact:
        worst, (i, j, m) = _triangle_scan(d) if n else (0.0, (0, 0, 0))
        if worst > tol:
            raise TriangleViolation(i, j, m, worst)
        slack = max(worst, 0.0)
    else:
        rng = np.random.default_rng(seed)
        trip = rng.integers(0, n, size=(samples, 3))
        i, j, m = trip.T
        viol = d[i, j] - (d[i, m] + d[m, j])
        k = int(np.argmax(viol))
        if viol[k] > tol:
            raise TriangleViolation(int(i[k]), int(j[k]), int(m[k]), float(viol[k]))
        # unsampled triples are only known to respect the tolerance
        slack = tol
    return _trusted(d, labels, tol_rel, meta, slack)


def _check_alpha(alpha):
    if not (0.0 < alpha <= 1.0) or not math.isfinite(alpha):
        raise AlphaOutOfRange(f"alpha must lie in (0, 1], got {alpha}")


def snowflake_transform(m: DistanceMatrix, alpha: float) -> DistanceMatrix:
    """Entrywise power ``d ** alpha``; ``alpha = 1`` is the identity."""
    _check_alpha(alpha)
    if alpha == 1.0:
        return m
    return _trusted(np.power(m.d, alpha), m.labels, m.tol_rel)


def rescale(m: DistanceMatrix, r: float) -> DistanceMatrix:
    if not (r > 0) or not math.isfinite(r):
        raise NonpositiveScale(f"scale must be positive, got {r}")
    return _trusted(m.d * r, m.labels, m.tol_rel)


def product(
    mx: DistanceMatrix,
    my: DistanceMatrix,
    mode: str = "l2",
    max_points: int = DEFAULT_PRODUCT_CAP,
) -> DistanceMatrix:
    """Cartesian product metric.

    Point ``(x, y)`` gets index ``x * my.n + y``. ``mode="l2"`` combines the
    factor distances with ``hypot`` (so a zero in one factor reproduces the
    other exactly), ``mode="sup"`` with ``max``.
    """
    nx, ny = mx.n, my.n
    if nx * ny > max_points:
        raise SizeOverflow(f"product has {nx * ny} points, cap is {max_points}")
    a = mx.d[:, None, :, None]
    b = my.d[None, :, None, :]
    if mode == "l2":
        full = np.hypot(a, b)
    elif mode == "sup":
        full = np.maximum(a, b)
    else:
        raise ParameterError(f"unknown product mode {mode!r}")
    full = full.reshape(nx * ny, nx * ny)
    labels = None
    if mx.labels is not None or my.labels is not None:
        lx = mx.labels or tuple(str(i) for i in range(nx))
        ly = my.labels or tuple(str(i) for i in range(ny))
        labels = tuple(f"({a},{b})" for a in lx for b in ly)
    return _trusted(full, labels, max(mx.tol_rel, my.tol_rel))


def rough_angle_triple_check(
    m: DistanceMatrix, i: int, j: int, z: int, beta: float, rtol: float = 1e-12
) -> bool:
    """True iff ``d(i,j) <= max(d(i,z) + beta d(z,j), beta d(i,z) + d(z,j))``.

    ``rtol`` absorbs rounding in the equality case (equispaced collinear
    triples of a snowflaked line sit exactly on the bound).
    """
    n = m.n
    for idx in (i, j, z):
        if not (0 <= idx < n):
            raise IndexOutOfRange(f"index {idx} outside [0, {n})")
    if len({i, j, z}) != 3:
        raise IndexOutOfRange("triple indices must be distinct")
    if not (0.0 < beta < 1.0):
        raise BetaOutOfRange(f"beta must lie in (0, 1), got {beta}")
    d = m.d
    bound = max(d[i, z] + beta * d[z, j], beta * d[i, z] + d[z, j])
    return bool(d[i, j] <= bound * (1.0 + rtol))


@dataclass(frozen=True)
class SnowflakeParams:
    alpha: float

    def __post_init__(self):
        _check_alpha(self.alpha)

    @property
    def beta(self) -> float:
        return 2.0**self.alpha - 1.0


@dataclass(frozen=True)
class BiLipschitzConstant:
    L: float

    def __post_init__(self):
        if not self.L >= 1.0:
            raise ParameterError(f"biLipschitz constant must be >= 1, got {self.L}")

    @classmethod
    def of_identity(cls, a: DistanceMatrix, b: DistanceMatrix) -> "BiLipschitzConstant":
        """Smallest L making the index-identity map between a and b L-biLipschitz."""
        if a.n != b.n:
            raise ParameterError("matrices must have the same size")
        off = ~np.eye(a.n, dtype=bool)
        ratio = b.d[off] / a.d[off]
        if ratio.size == 0:
            return cls(1.0)
        return cls(float(max(ratio.max(), 1.0 / ratio.min(), 1.0)))

"""Example spaces as :class:`DistanceMatrix` values.

All generators are deterministic given their parameters (and seed). The
parameters are recorded in ``meta["generator"]`` of the returned matrix.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Optional

import numpy as np

from .errors import CapTooSmall, ParameterError, ResolutionTooSmall, SizeOverflow
from .metric import DistanceMatrix, _check_alpha, _trusted, product, snowflake_transform

DEFAULT_TW_CAP = 500
DEFAULT_MAX_POINTS = 4096

KINDS = (
    "euclidean_grid",
    "snowflaked_interval",
    "tyson_wu_block",
    "gamma_product",
    "random_metric",
    "product_of",
)


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown generator kind {self.kind!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "GeneratorSpec":
        return cls(obj["kind"], dict(obj.get("params", {})))


def _with_meta(m: DistanceMatrix, spec: GeneratorSpec, **extra) -> DistanceMatrix:
    meta = {"generator": spec.to_dict()}
    meta.update(extra)
    return _trusted(m.d, m.labels, m.tol_rel, meta=meta)


def euclidean_grid(m: int) -> DistanceMatrix:
    """Points ``i / (m - 1)`` of the unit interval with ``|x - y|``."""
    if int(m) != m or m < 2:
        raise ResolutionTooSmall(f"resolution must be >= 2, got {m}")
    x = np.arange(m) / (m - 1)
    d = np.abs(x[:, None] - x[None, :])
    out = _trusted(d, [repr(float(v)) for v in x])
    return _with_meta(out, GeneratorSpec("euclidean_grid", {"m": int(m)}))


def snowflaked_interval(m: int, alpha_s: float) -> DistanceMatrix:
    """The grid of :func:`euclidean_grid` with distances ``|x - y| ** alpha_s``."""
    _check_alpha(alpha_s)
    out = snowflake_transform(euclidean_grid(m), alpha_s)
    return _with_meta(
        out, GeneratorSpec("snowflaked_interval", {"m": int(m), "alpha_s": float(alpha_s)})
    )


def tyson_wu_counts(n: int):
    """Per-axis grid layout of the block ``X_n``.

    Returns ``(half, axis_len)`` where coordinates are integer multiples of
    ``2**-n``: the first coordinate ranges over ``2**(n+1) + [-half, half]``,
    the others over ``[-half, half]``.
    """
    # largest j with j * 2**-n <= 2 / sqrt(n); exact integer arithmetic
    # j <= 2**(n+1) / sqrt(n)  <=>  j**2 * n <= 4**(n+1)
    half = math.isqrt(4 ** (n + 1) // n)
    while (half + 1) ** 2 * n <= 4 ** (n + 1):
        half += 1
    while half**2 * n > 4 ** (n + 1):
        half -= 1
    return half, 2 * half + 1


def tyson_wu_block(n: int, cap: int = DEFAULT_TW_CAP, seed: int = 0) -> DistanceMatrix:
    """Grid block ``Q_n ∩ 2**-n Z**n`` with Euclidean distances.

    ``Q_n`` is the sup-norm cube of half-side ``2 / sqrt(n)`` centred at
    ``2 e_1``. When the full grid exceeds ``cap`` points the block is
    subsampled: indices ``0 .. L-1`` always hold the line through the centre
    in the ``e_1`` direction (in increasing order), the remaining slots are
    filled with distinct grid points drawn uniformly with ``seed``. If the
    axis line itself is longer than ``cap``, its centred run of ``cap``
    consecutive points is kept instead.

    ``meta`` records ``r_n = sqrt(n) / 2``, the axis indices, the grid
    spacing and whether the axis line was truncated.
    """
    if int(n) != n or n < 1:
        raise ParameterError(f"dimension must be >= 1, got {n}")
    n = int(n)
    if cap < 3:
        raise CapTooSmall(f"cap {cap} cannot hold a 3-point chain")
    half, axis_len = tyson_wu_counts(n)
    centre = 2 ** (n + 1)
    full = axis_len**n

    if axis_len <= cap:
        axis_off = np.arange(-half, half + 1)
        truncated = False
    else:
        lo = -((cap - 1) // 2)
        axis_off = np.arange(lo, lo + cap)
        truncated = True
    axis = np.zeros((len(axis_off), n), dtype=np.int64)
    axis[:, 0] = axis_off
    budget = min(cap, full) - len(axis)

    if budget > 0 and full <= 4 * cap:
        grids = np.meshgrid(*[np.arange(-half, half + 1)] * n, indexing="ij")
        allpts = np.stack([g.ravel() for g in grids], axis=1)
        on_axis = np.all(allpts[:, 1:] == 0, axis=1)
        pool = allpts[~on_axis]
        rng = np.random.default_rng(seed)
        pick = np.sort(rng.choice(len(pool), size=min(budget, len(pool)), replace=False))
        extra = pool[pick]
    elif budget > 0:
        rng = np.random.default_rng(seed)
        seen = set()
        rows = []
        while len(rows) < budget:
            cand = rng.integers(-half, half + 1, size=(budget, n))
            for row in cand:
                if not row[1:].any():
                    continue
                key = row.tobytes()
                if key in seen:
                    continue
                seen.add(key)
                rows.append(row)
                if len(rows) == budget:
                    break
        extra = np.array(rows, dtype=np.int64)
        extra = extra[np.lexsort(extra.T[::-1])]
    else:
        extra = np.zeros((0, n), dtype=np.int64)

    pts = np.concatenate([axis, extra])
    diff = pts[:, None, :] - pts[None, :, :]
    sq = np.einsum("ijk,ijk->ij", diff, diff)
    spacing = 2.0**-n
    d = np.sqrt(sq.astype(np.float64)) * spacing
    pts_real = pts.astype(np.float64) * spacing
    pts_real[:, 0] += centre * spacing
    labels = [",".join(repr(float(v)) for v in row) for row in pts_real]

    spec = GeneratorSpec("tyson_wu_block", {"n": n, "cap": int(cap), "seed": int(seed)})
    return _with_meta(
        _trusted(d, labels),
        spec,
        r_n=math.sqrt(n) / 2,
        axis_indices=list(range(len(axis))),
        axis_truncated=truncated,
        full_axis_len=axis_len,
        spacing=spacing,
        half_side=2 / math.sqrt(n),
    )


def gamma_schedule(levels: int, c: float):
    """``gamma_j = 1 - c / (j + 1)`` for ``j = 1 .. levels``."""
    return [1.0 - c / (j + 1) for j in range(1, levels + 1)]


def gamma_product(
    levels: int, m: int, c: float, max_points: int = DEFAULT_MAX_POINTS
) -> DistanceMatrix:
    """Axis samples of the product with ``d = sqrt(sum |x_j - y_j| ** (2 gamma_j))``.

    Index 0 is the origin; indices ``1 + (j-1)(m-1) .. j(m-1)`` hold the
    points ``t e_j`` for ``t = 1/(m-1), ..., 1``. Restricted to the origin and
    family ``j`` the space is ``snowflaked_interval(m, gamma_j)``.
    """
    if int(levels) != levels or levels < 1:
        raise ParameterError(f"levels must be >= 1, got {levels}")
    if int(m) != m or m < 3:
        raise ResolutionTooSmall(f"resolution must be >= 3, got {m}")
    if not 0.0 <= c < 1.0:
        raise ParameterError(f"c must lie in [0, 1), got {c}")
    size = 1 + levels * (m - 1)
    if size > max_points:
        raise SizeOverflow(f"{size} points exceeds cap {max_points}")
    gam = np.array(gamma_schedule(levels, c))
    t = np.arange(m) / (m - 1)
    coord = np.zeros(size, dtype=np.int64)  # 0 = origin, else family index 1..J
    val = np.zeros(size)
    for j in range(1, levels + 1):
        sl = slice(1 + (j - 1) * (m - 1), 1 + j * (m - 1))
        coord[sl] = j
        val[sl] = t[1:]
    # per-coordinate contributions |dx_j| ** gamma_j
    same = coord[:, None] == coord[None, :]
    g_row = np.where(coord > 0, gam[np.maximum(coord, 1) - 1], 1.0)
    a = np.where(coord > 0, val ** g_row, 0.0)
    d_same = np.abs(val[:, None] - val[None, :]) ** g_row[:, None]
    d_diff = np.hypot(a[:, None], a[None, :])
    d = np.where(same, d_same, d_diff)
    # rows involving the origin: only the other point's coordinate is nonzero
    d[0, :] = a
    d[:, 0] = a
    np.fill_diagonal(d, 0.0)
    labels = ["0"] + [f"e{j}*{val[i]!r}" for i, j in enumerate(coord) if j > 0]
    spec = GeneratorSpec(
        "gamma_product", {"levels": int(levels), "m": int(m), "c": float(c)}
    )
    return _with_meta(_trusted(d, labels), spec, gammas=gam.tolist())


def gamma_family_indices(levels: int, m: int, j: int):
    """Indices of the origin and family ``j`` inside :func:`gamma_product`."""
    if not 1 <= j <= levels:
        raise ParameterError(f"family {j} outside 1..{levels}")
    return [0] + list(range(1 + (j - 1) * (m - 1), 1 + j * (m - 1)))


def random_metric(
    n: int,
    seed: int = 0,
    model: str = "uniform_perturbed",
    dim: int = 2,
    p: float = 2.0,
) -> DistanceMatrix:
    """Random test instances.

    ``uniform_perturbed`` draws every distance uniformly from ``[1, 2]``,
    which satisfies the triangle inequality automatically.
    ``random_points_lp`` samples ``n`` points of ``[0, 1]**dim`` and uses the
    ``p``-norm.
    """
    if int(n) != n or n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    rng = np.random.default_rng(seed)
    if model == "uniform_perturbed":
        upper = rng.uniform(1.0, 2.0, size=(n, n))
        d = np.triu(upper, 1)
        d = d + d.T
        params = {"n": int(n), "seed": int(seed), "model": model}
    elif model == "random_points_lp":
        if not p >= 1:
            raise ParameterError(f"p must be >= 1, got {p}")
        pts = rng.random((n, dim))
        diff = np.abs(pts[:, None, :] - pts[None, :, :])
        if math.isinf(p):
            d = diff.max(axis=2)
        else:
            d = (diff**p).sum(axis=2) ** (1.0 / p)
        params = {"n": int(n), "seed": int(seed), "model": model, "dim": int(dim), "p": float(p)}
    else:
        raise ParameterError(f"unknown random model {model!r}")
    return _with_meta(_trusted(d), GeneratorSpec("random_metric", params))


def generate(spec: GeneratorSpec) -> DistanceMatrix:
    """Dispatch a :class:`GeneratorSpec` to its generator."""
    p: dict[str, Any] = dict(spec.params)
    try:
        if spec.kind == "euclidean_grid":
            return euclidean_grid(p["m"])
        if spec.kind == "snowflaked_interval":
            return snowflaked_interval(p["m"], p["alpha_s"])
        if spec.kind == "tyson_wu_block":
            return tyson_wu_block(p["n"], p.get("cap", DEFAULT_TW_CAP), p.get("seed", 0))
        if spec.kind == "gamma_product":
            return gamma_product(p["levels"], p["m"], p["c"])
        if spec.kind == "random_metric":
            return random_metric(
                p["n"], p.get("seed", 0), p.get("model", "uniform_perturbed"),
                p.get("dim", 2), p.get("p", 2.0),
            )
        if spec.kind == "product_of":
            f1, f2 = (generate(GeneratorSpec.from_dict(f)) for f in p["factors"])
            mode = p.get("mode", "l2")
            out = product(f1, f2, mode, p.get("max_points", DEFAULT_MAX_POINTS))
            return _with_meta(out, spec)
    except KeyError as exc:
        raise ParameterError(f"{spec.kind} requires parameter {exc.args[0]!r}") from None
    raise ParameterError(f"unknown generator kind {spec.kind!r}")

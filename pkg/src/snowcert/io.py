"""Matrix and report serialisation.

JSON output is canonical: keys sorted, floats written with 17 significant
digits, so that writing, reading and writing again is byte-stable.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import FormatError
from .metric import DEFAULT_TOL_REL, DistanceMatrix, validate


def _encode(obj, out):
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            out.append("NaN")
        elif math.isinf(x):
            out.append("Infinity" if x > 0 else "-Infinity")
        else:
            out.append(format(x, ".17g"))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                out.append(",")
            out.append(json.dumps(str(key)))
            out.append(":")
            _encode(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(",")
            _encode(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def canonical_dumps(obj) -> str:
    out: list = []
    _encode(obj, out)
    return "".join(out) + "\n"


def matrix_to_dict(m: DistanceMatrix) -> dict:
    labels = list(m.labels) if m.labels is not None else [str(i) for i in range(m.n)]
    out = {"n": m.n, "labels": labels, "d": m.d.tolist()}
    if m.meta:
        out["meta"] = m.meta
    return out


def matrix_from_dict(obj: dict, tol_rel: float = DEFAULT_TOL_REL) -> DistanceMatrix:
    if not isinstance(obj, dict) or "d" not in obj:
        raise FormatError("matrix JSON must be an object with a 'd' field")
    rows = obj["d"]
    n = obj.get("n")
    if n is None:
        raise FormatError("matrix JSON lacks 'n'")
    if not isinstance(rows, list) or len(rows) != n or any(
        not isinstance(r, list) or len(r) != n for r in rows
    ):
        raise FormatError(f"declared n={n} does not match the shape of 'd'")
    labels = obj.get("labels")
    if labels is not None and len(labels) != n:
        raise FormatError(f"{len(labels)} labels for n={n}")
    try:
        arr = np.array(rows, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"non-numeric entry in 'd': {exc}") from None
    return validate(arr, tol_rel=tol_rel, labels=labels, meta=obj.get("meta"))


def _read_text(path) -> str:
    if str(path) == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _write_text(path, text: str) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(path).write_text(text)


def labels_sidecar(path) -> Path:
    return Path(str(path) + ".labels")


def matrix_to_csv(m: DistanceMatrix) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in m.d:
        w.writerow([format(float(v), ".17g") for v in row])
    return buf.getvalue()


def matrix_from_csv(text: str, labels=None, tol_rel: float = DEFAULT_TOL_REL) -> DistanceMatrix:
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise FormatError("CSV matrix is not square")
    try:
        arr = np.array([[float(v) for v in r] for r in rows], dtype=np.float64)
    except ValueError as exc:
        raise FormatError(f"non-numeric CSV entry: {exc}") from None
    if labels is not None and len(labels) != n:
        raise FormatError(f"{len(labels)} labels for a {n}x{n} matrix")
    return validate(arr.reshape(n, n), tol_rel=tol_rel, labels=labels)


def guess_format(path, fmt: Optional[str]) -> str:
    if fmt:
        return fmt
    return "csv" if str(path).lower().endswith(".csv") else "json"


def read_matrix(path, fmt: Optional[str] = None, tol_rel: float = DEFAULT_TOL_REL) -> DistanceMatrix:
    fmt = guess_format(path, fmt)
    text = _read_text(path)
    if fmt == "json":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc}") from None
        return matrix_from_dict(obj, tol_rel)
    if fmt == "csv":
        labels = None
        if str(path) != "-" and labels_sidecar(path).exists():
            labels = labels_sidecar(path).read_text().splitlines()
        return matrix_from_csv(text, labels, tol_rel)
    raise FormatError(f"unknown format {fmt!r}")


def write_matrix(m: DistanceMatrix, path, fmt: Optional[str] = None) -> None:
    fmt = guess_format(path or "-", fmt)
    if fmt == "json":
        _write_text(path, canonical_dumps(matrix_to_dict(m)))
    elif fmt == "csv":
        _write_text(path, matrix_to_csv(m))
        if path is not None and str(path) != "-" and m.labels is not None:
            labels_sidecar(path).write_text("\n".join(m.labels) + "\n")
    else:
        raise FormatError(f"unknown format {fmt!r}")


def write_json(obj, path=None) -> None:
    _write_text(path, canonical_dumps(obj))

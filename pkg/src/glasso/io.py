"""Reading and writing matrices, samples, traces and run records.

Formats:

* dense CSV: one matrix row per line, comma separated;
* Matrix Market ``coordinate``/``array``, ``real``/``integer``,
  ``general``/``symmetric``; estimates are written as symmetric coordinate
  files holding only exact nonzeros of the lower triangle;
* trace CSV with a fixed header, floats in shortest round-trip form;
* run records as JSON with ``"schema": "v1"``; NaN and infinities are refused.

All text is UTF-8 with LF line endings.
"""
from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

from .problems import SampleSet
from .solver import IterTrace

__all__ = [
    "AsymmetricInput",
    "DimensionError",
    "EmptyFile",
    "Format",
    "MatrixIOError",
    "ParseError",
    "RaggedRows",
    "RunRecord",
    "SerializationError",
    "TRACE_HEADER",
    "read_matrix",
    "read_result",
    "read_samples",
    "read_trace",
    "write_matrix_csv",
    "write_matrix_market",
    "write_result",
    "write_samples",
    "write_trace",
]

SCHEMA_VERSION = "v1"
TRACE_HEADER = [f.name for f in fields(IterTrace)]
_SYM_TOL = 1e-12


class MatrixIOError(ValueError):
    """Base class for input errors; carries the offending path when known."""


class ParseError(MatrixIOError):
    def __init__(self, path, line: int, column: int | None, msg: str):
        where = f"{path}:{line}" + (f":{column}" if column is not None else "")
        super().__init__(f"{where}: {msg}")
        self.line = line
        self.column = column


class AsymmetricInput(MatrixIOError):
    def __init__(self, path, deviation: float):
        super().__init__(f"{path}: matrix is not symmetric (max deviation {deviation:.3g})")
        self.deviation = deviation


class DimensionError(MatrixIOError):
    pass


class RaggedRows(MatrixIOError):
    pass


class EmptyFile(MatrixIOError):
    pass


class SerializationError(ValueError):
    pass


class Format(str, enum.Enum):
    DENSE_CSV = "csv"
    MATRIX_MARKET = "mtx"

    @classmethod
    def from_path(cls, path) -> "Format":
        return cls.MATRIX_MARKET if Path(path).suffix.lower() in (".mtx", ".mm") else cls.DENSE_CSV


def _fmt(x: float) -> str:
    """Shortest decimal that round-trips to the same double."""
    return repr(float(x))


def _parse_float(token: str, path, line: int, column: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(path, line, column, f"not a number: {token!r}") from None


# -- dense CSV -------------------------------------------------------------


def _read_csv_rows(path) -> list[list[float]]:
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            rows.append(
                [_parse_float(c.strip(), path, lineno, col) for col, c in enumerate(row, start=1)]
            )
    return rows


def _read_dense_csv(path) -> np.ndarray:
    rows = _read_csv_rows(path)
    if not rows:
        raise EmptyFile(f"{path}: no data")
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise DimensionError(f"{path}: expected {n} columns in every row for an {n}x{n} matrix")
    return np.array(rows)


def write_matrix_csv(m: np.ndarray, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in np.asarray(m, dtype=float):
            fh.write(",".join(_fmt(x) for x in row) + "\n")


# -- Matrix Market ---------------------------------------------------------


def _read_matrix_market(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if not lines or not lines[0].lower().startswith("%%matrixmarket"):
        raise ParseError(path, 1, None, "missing %%MatrixMarket header")
    header = lines[0].split()
    if len(header) != 5 or header[1].lower() != "matrix":
        raise ParseError(path, 1, None, f"unsupported header {lines[0]!r}")
    layout, field_, symmetry = (h.lower() for h in header[2:])
    if layout not in ("coordinate", "array"):
        raise ParseError(path, 1, 3, f"unsupported layout {layout!r}")
    if field_ not in ("real", "integer", "double"):
        raise ParseError(path, 1, 4, f"unsupported field {field_!r}")
    if symmetry not in ("general", "symmetric"):
        raise ParseError(path, 1, 5, f"unsupported symmetry {symmetry!r}")

    body = [
        (i, ln.split())
        for i, ln in enumerate(lines[1:], start=2)
        if ln.strip() and not ln.lstrip().startswith("%")
    ]
    if not body:
        raise ParseError(path, len(lines), None, "missing size line")
    size_line, size = body[0]
    try:
        dims = [int(tok) for tok in size]
    except ValueError:
        raise ParseError(path, size_line, None, f"bad size line {' '.join(size)!r}") from None
    rows, cols = dims[0], dims[1] if len(dims) > 1 else None
    if cols is None or rows != cols:
        raise DimensionError(f"{path}: matrix must be square, got size line {size}")
    n = rows
    a = np.zeros((n, n))
    entries = body[1:]

    if layout == "coordinate":
        if len(dims) != 3:
            raise ParseError(path, size_line, None, "coordinate size line needs rows cols nnz")
        if len(entries) != dims[2]:
            raise DimensionError(f"{path}: header declares {dims[2]} entries, found {len(entries)}")
        for lineno, toks in entries:
            if len(toks) != 3:
                raise ParseError(path, lineno, None, "expected 'row col value'")
            try:
                i, j = int(toks[0]) - 1, int(toks[1]) - 1
            except ValueError:
                raise ParseError(path, lineno, 1, "bad index") from None
            if not (0 <= i < n and 0 <= j < n):
                raise DimensionError(f"{path}:{lineno}: index ({i + 1}, {j + 1}) outside {n}x{n}")
            v = _parse_float(toks[2], path, lineno, 3)
            a[i, j] = v
            if symmetry == "symmetric":
                if j > i:
                    raise ParseError(path, lineno, None, "symmetric storage must be lower triangle")
                a[j, i] = v
    else:
        # column-major; symmetric stores the lower triangle only
        if symmetry == "symmetric":
            slots = [(i, j) for j in range(n) for i in range(j, n)]
        else:
            slots = [(i, j) for j in range(n) for i in range(n)]
        if len(entries) != len(slots):
            raise DimensionError(f"{path}: expected {len(slots)} values, found {len(entries)}")
        for (i, j), (lineno, toks) in zip(slots, entries):
            if len(toks) != 1:
                raise ParseError(path, lineno, None, "expected one value per line")
            a[i, j] = _parse_float(toks[0], path, lineno, 1)
            if symmetry == "symmetric":
                a[j, i] = a[i, j]
    return a


def write_matrix_market(m: np.ndarray, path, comment: str | None = None) -> None:
    """Write the exact nonzeros of the lower triangle in symmetric coordinate form."""
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    ii, jj = np.nonzero(np.tril(m))
    order = np.lexsort((ii, jj))  # column-major, like most MM writers
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("%%MatrixMarket matrix coordinate real symmetric\n")
        if comment:
            for line in comment.splitlines():
                fh.write(f"% {line}\n")
        fh.write(f"{n} {n} {len(ii)}\n")
        for k in order:
            fh.write(f"{ii[k] + 1} {jj[k] + 1} {_fmt(m[ii[k], jj[k]])}\n")


def read_matrix(path, fmt: Format | str | None = None) -> np.ndarray:
    """Read a symmetric matrix; the format defaults to the file extension."""
    fmt = Format.from_path(path) if fmt is None else Format(fmt)
    a = _read_matrix_market(path) if fmt is Format.MATRIX_MARKET else _read_dense_csv(path)
    dev = float(np.max(np.abs(a - a.T))) if a.size else 0.0
    if dev > _SYM_TOL:
        raise AsymmetricInput(path, dev)
    return 0.5 * (a + a.T)


# -- samples ---------------------------------------------------------------


def read_samples(path) -> SampleSet:
    """One sample per CSV row."""
    rows = _read_csv_rows(path)
    if not rows:
        raise EmptyFile(f"{path}: no samples")
    width = len(rows[0])
    for k, r in enumerate(rows, start=1):
        if len(r) != width:
            raise RaggedRows(f"{path}: row {k} has {len(r)} values, expected {width}")
    return SampleSet(np.array(rows))


def write_samples(samples: SampleSet, path) -> None:
    write_matrix_csv(samples.samples, path)


# -- traces ----------------------------------------------------------------


def write_trace(traces, path) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_HEADER)
            for tr in traces:
                w.writerow(
                    _fmt(v) if isinstance(v, float) else str(v)
                    for v in (getattr(tr, k) for k in TRACE_HEADER)
                )
    except OSError as exc:
        raise OSError(f"cannot write trace to {path}: {exc}") from exc


def read_trace(path) -> list[IterTrace]:
    types = {f.name: f.type for f in fields(IterTrace)}
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != TRACE_HEADER:
            raise ParseError(path, 1, None, f"unexpected trace header {reader.fieldnames}")
        for row in reader:
            out.append(
                IterTrace(**{k: int(v) if types[k] in (int, "int") else float(v) for k, v in row.items()})
            )
    return out


# -- run records -----------------------------------------------------------


@dataclass
class RunRecord:
    """Summary of one solve, as written by ``glasso solve`` and ``glasso bench``."""

    kind: str
    n: int
    m: int | None
    alpha: float
    seed: int | None
    shift: float | None
    solver: str
    config: dict[str, Any]
    iterations: int
    termination: str
    converged: bool
    final_f: float
    min_subgrad_l1: float
    min_subgrad_fro: float
    nnz: int
    wall_seconds: float
    extra: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {"schema": SCHEMA_VERSION, **asdict(self)}
        try:
            return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False)
        except ValueError as exc:
            raise SerializationError(f"run record has a non-finite value: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        payload = json.loads(text)
        version = payload.pop("schema", None)
        if version != SCHEMA_VERSION:
            raise SerializationError(f"unsupported schema {version!r}")
        return cls(**payload)


def _check_finite(obj, where="record"):
    if isinstance(obj, float) and not math.isfinite(obj):
        raise SerializationError(f"{where} is not finite ({obj})")
    if isinstance(obj, dict):
        for k, v in obj.items():
            _check_finite(v, f"{where}.{k}")


def write_result(record: RunRecord, path) -> None:
    _check_finite(asdict(record))
    text = record.to_json()
    try:
        Path(path).write_text(text + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write result to {path}: {exc}") from exc


def read_result(path) -> RunRecord:
    return RunRecord.from_json(Path(path).read_text(encoding="utf-8"))

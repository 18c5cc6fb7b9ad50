"""Loaders for tabular datasets: plain CSV and libsvm-format text files.

Both loaders are strict: ragged rows, non-numeric cells, out-of-range
indices or empty files raise ParseError with the offending 1-based line
number instead of silently truncating.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError
from .linalg import DenseMatrix


@dataclass(frozen=True)
class LabeledTable:
    """Feature matrix plus optional integer row labels."""

    features: DenseMatrix
    labels: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.labels is not None:
            lab = np.ascontiguousarray(self.labels, dtype=np.int64)
            if lab.shape != (self.features.rows,):
                raise ValueError("labels length must match the number of rows")
            lab.setflags(write=False)
            object.__setattr__(self, "labels", lab)


def _parse_float(token: str, lineno: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"non-numeric cell {token!r}", lineno) from None


def _parse_label(token: str, lineno: int) -> int:
    value = _parse_float(token, lineno)
    if value != int(value):
        raise ParseError(f"label {token!r} is not an integer", lineno)
    return int(value)


def load_csv(
    path: str | Path,
    has_label_column: bool = False,
    delimiter: str = ",",
    skip_header: int = 0,
) -> LabeledTable:
    """Parse a rectangular numeric CSV; optional leading integer label column.

    `skip_header` ignores that many leading lines (the trajectory files the
    experiment runner writes carry one title row).
    """
    rows: list[list[float]] = []
    labels: list[int] = []
    width: int | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if lineno <= skip_header:
                continue
            line = raw.strip()
            if not line:
                continue
            cells = line.split(delimiter)
            if has_label_column:
                if len(cells) < 2:
                    raise ParseError("expected a label and at least one feature", lineno)
                labels.append(_parse_label(cells[0], lineno))
                cells = cells[1:]
            values = [_parse_float(c, lineno) for c in cells]
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise ParseError(
                    f"ragged row: {len(values)} cells, expected {width}", lineno
                )
            rows.append(values)
    if not rows:
        raise ParseError("file contains no data rows", 1)
    features = DenseMatrix(np.asarray(rows, dtype=np.float64))
    return LabeledTable(features=features, labels=np.asarray(labels) if has_label_column else None)


def load_libsvm(path: str | Path, dim: int) -> LabeledTable:
    """Parse libsvm text ("label idx:val ...", 1-based indices) to a dense table.

    Absent indices are zero; indices outside [1, dim] or malformed pairs
    raise ParseError with the line number.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    data: list[np.ndarray] = []
    labels: list[int] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            labels.append(_parse_label(parts[0], lineno))
            row = np.zeros(dim, dtype=np.float64)
            for pair in parts[1:]:
                idx_str, sep, val_str = pair.partition(":")
                if not sep:
                    raise ParseError(f"malformed feature pair {pair!r}", lineno)
                try:
                    idx = int(idx_str)
                except ValueError:
                    raise ParseError(f"malformed feature index {idx_str!r}", lineno) from None
                if not 1 <= idx <= dim:
                    raise ParseError(
                        f"feature index {idx} out of range [1, {dim}]", lineno
                    )
                row[idx - 1] = _parse_float(val_str, lineno)
            data.append(row)
    if not data:
        raise ParseError("file contains no data rows", 1)
    return LabeledTable(
        features=DenseMatrix(np.vstack(data)), labels=np.asarray(labels)
    )


def write_csv(path: str | Path, table: LabeledTable, delimiter: str = ",") -> None:
    """Emit a table in the exact format load_csv reads back.

    Floats are written with repr (shortest round-trip form), so
    write -> load reproduces the matrix bit-for-bit.
    """
    a = table.features.ndarray
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(a.shape[0]):
            cells = [repr(x) for x in a[i].tolist()]
            if table.labels is not None:
                cells.insert(0, str(int(table.labels[i])))
            fh.write(delimiter.join(cells) + "\n")


def center_columns(table: LabeledTable) -> LabeledTable:
    """Subtract column means from the features (opt-in preprocessing)."""
    a = table.features.ndarray
    return LabeledTable(
        features=DenseMatrix(a - a.mean(axis=0, keepdims=True)),
        labels=table.labels,
    )

"""CSV ingestion, the synthetic overlapped-imbalanced generator, summaries.

CSV format: comma-separated UTF-8, optional header, decimal-point reals.
The label column is named (header required) or indexed; every other column
must parse as a finite 64-bit float. The positive class is selected either
by a literal label value or by a numeric threshold predicate on the label
column (e.g. ">= 7" for a quality score). Parse failures carry the data row
and column they occurred in.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import DataError, Dataset

_PREDICATE_OPS = {
    ">=": lambda a, b: a >= b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    "<": lambda a, b: a < b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


@dataclass(frozen=True)
class CsvSchema:
    """How to read a labelled CSV.

    Exactly one of `positive_label` (literal string match) or
    `positive_predicate` ((op, value) applied to the numeric label column)
    must be given.
    """

    label_column: str | int
    positive_label: str | None = None
    positive_predicate: tuple[str, float] | None = None
    has_header: bool = True
    delimiter: str = ","

    def __post_init__(self) -> None:
        if (self.positive_label is None) == (self.positive_predicate is None):
            raise ValueError("give exactly one of positive_label / positive_predicate")
        if self.positive_predicate is not None:
            op = self.positive_predicate[0]
            if op not in _PREDICATE_OPS:
                raise ValueError(f"unknown predicate operator {op!r}")
        if not self.has_header and isinstance(self.label_column, str):
            raise ValueError("a named label column requires has_header=True")


@dataclass(frozen=True)
class SynthSpec:
    """Two unit Gaussians, class means `separation` apart on the first axis."""

    negatives: int
    positives: int
    dim: int
    separation: float
    seed: int = 0

    def __post_init__(self) -> None:
        if self.negatives < 2 or self.positives < 2:
            raise ValueError("need at least 2 samples per class")
        if self.dim < 1:
            raise ValueError("dim must be at least 1")
        if self.separation < 0:
            raise ValueError("separation must be nonnegative")


def load_csv(path: str | Path, schema: CsvSchema) -> Dataset:
    """Read a CSV into a Dataset, mapping the label column per the schema."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh, delimiter=schema.delimiter) if row]
    if not rows:
        raise DataError(f"{path}: file is empty")

    if schema.has_header:
        header = [cell.strip() for cell in rows[0]]
        data = rows[1:]
    else:
        header = [f"column {i}" for i in range(len(rows[0]))]
        data = rows
    if not data:
        raise DataError(f"{path}: no data rows")

    if isinstance(schema.label_column, str):
        try:
            label_idx = header.index(schema.label_column)
        except ValueError:
            raise DataError(
                f"{path}: label column {schema.label_column!r} not in header {header}") from None
    else:
        label_idx = schema.label_column
        if not 0 <= label_idx < len(rows[0]):
            raise DataError(f"{path}: label column index {label_idx} out of range")

    feature_idx = [i for i in range(len(header)) if i != label_idx]
    n, d = len(data), len(feature_idx)
    X = np.empty((n, d))
    y = np.empty(n, dtype=np.int64)
    for r, row in enumerate(data):
        if len(row) != len(header):
            raise DataError(f"{path}: row {r + 1} has {len(row)} cells, expected {len(header)}")
        for j, col in enumerate(feature_idx):
            cell = row[col].strip()
            try:
                value = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: row {r + 1}, column {header[col]!r}: "
                    f"cannot parse {cell!r} as a number") from None
            if not math.isfinite(value):
                raise DataError(
                    f"{path}: row {r + 1}, column {header[col]!r}: non-finite value {cell!r}")
            X[r, j] = value
        label_cell = row[label_idx].strip()
        if schema.positive_label is not None:
            y[r] = 1 if label_cell == schema.positive_label else 0
        else:
            op, ref = schema.positive_predicate
            try:
                label_value = float(label_cell)
            except ValueError:
                raise DataError(
                    f"{path}: row {r + 1}, column {header[label_idx]!r}: "
                    f"cannot parse label {label_cell!r} as a number") from None
            y[r] = 1 if _PREDICATE_OPS[op](label_value, ref) else 0
    return Dataset(X, y)


def write_csv(ds: Dataset, path: str | Path, label_column: str = "label") -> None:
    """Write a Dataset as CSV with header f1..fd plus the label column.

    Floats are written with shortest round-trip repr, so load_csv(write_csv)
    reproduces the dataset exactly.
    """
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{j + 1}" for j in range(ds.dim)] + [label_column])
        for i in range(ds.n):
            writer.writerow([repr(float(v)) for v in ds.X[i]] + [int(ds.y[i])])


def generate_synth(spec: SynthSpec) -> Dataset:
    """Sample the two-Gaussian dataset; negatives first, then positives."""
    rng = np.random.default_rng(spec.seed)
    X_neg = rng.standard_normal((spec.negatives, spec.dim))
    X_pos = rng.standard_normal((spec.positives, spec.dim))
    X_pos[:, 0] += spec.separation
    X = np.vstack([X_neg, X_pos])
    y = np.concatenate([np.zeros(spec.negatives, dtype=np.int64),
                        np.ones(spec.positives, dtype=np.int64)])
    return Dataset(X, y)


def summarize(ds: Dataset) -> dict:
    """Instance/feature counts, per-class counts and the imbalance ratio.

    The ratio is None (undefined) when either class is absent.
    """
    pos = ds.positive_count
    neg = ds.negative_count
    ratio = neg / pos if pos > 0 and neg > 0 else None
    return {
        "instances": ds.n,
        "features": ds.dim,
        "positives": pos,
        "negatives": neg,
        "imbalance_ratio": ratio,
    }

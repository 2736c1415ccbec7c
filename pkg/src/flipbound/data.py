"""Dataset container, CSV ingestion, synthetic generators, report files.

CSV datasets carry a header row, numeric feature columns, and one label
column; labels are mapped onto {-1, +1} through the declared positive
label.  Floats are written with repr so save/load round-trips are
exact.  Reports are plot-ready CSV with a fixed header per experiment.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, InvalidParameterError
from .projection import rng_stream

__all__ = [
    "Dataset",
    "load_csv",
    "save_csv",
    "gen_two_gaussians",
    "ExperimentReport",
    "save_report",
    "load_report_rows",
]


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    feature_names: list[str] | None = None
    source: str = ""

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.float64)
        if self.X.ndim != 2 or self.X.shape[0] < 1 or self.X.shape[1] < 1:
            raise DataError("dataset needs at least one row and one feature")
        if self.y.shape != (self.X.shape[0],):
            raise DataError("label vector length must match the number of rows")
        if set(np.unique(self.y)) - {-1.0, 1.0}:
            raise DataError("labels must be exactly -1 or +1")
        if not np.all(np.isfinite(self.X)):
            raise DataError("dataset contains non-finite feature values")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


def load_csv(path, label_column: str, positive_label: str) -> Dataset:
    """Read a headered numeric CSV into a Dataset.

    Rows with missing values are rejected with their line numbers; more
    than two distinct label values, or a positive label that never
    occurs alongside a second value, is an error naming the values.
    """
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if label_column not in header:
            raise DataError(f"{path}: no column named {label_column!r} in header")
        label_idx = header.index(label_column)
        feature_names = [h for i, h in enumerate(header) if i != label_idx]

        rows, labels, missing = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            if any(cell.strip() == "" for cell in row):
                missing.append(lineno)
                continue
            labels.append(row[label_idx].strip())
            feats = []
            for i, cell in enumerate(row):
                if i == label_idx:
                    continue
                try:
                    value = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}:{lineno}: non-numeric value {cell!r} in column {header[i]!r}"
                    ) from None
                if not math.isfinite(value):
                    raise DataError(
                        f"{path}:{lineno}: non-finite value {cell!r} in column {header[i]!r}"
                    )
                feats.append(value)
            rows.append(feats)
        if missing:
            where = ", ".join(str(n) for n in missing[:10])
            raise DataError(f"{path}: missing values at line(s) {where}")
        if not rows:
            raise DataError(f"{path}: no data rows")

    positive = str(positive_label)
    observed = sorted(set(labels))
    if len(observed) > 2:
        raise DataError(f"{path}: more than two label values: {observed}")
    if len(observed) == 2 and positive not in observed:
        raise DataError(
            f"{path}: positive label {positive!r} not among observed labels {observed}"
        )
    y = np.array([1.0 if lab == positive else -1.0 for lab in labels])
    return Dataset(np.array(rows, dtype=np.float64), y,
                   feature_names=feature_names, source=str(path))


def save_csv(dataset: Dataset, path, label_column: str = "label",
             positive_label: str = "1", negative_label: str = "-1") -> None:
    names = dataset.feature_names or [f"x{i}" for i in range(dataset.d)]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(names) + [label_column])
        for row, lab in zip(dataset.X, dataset.y):
            writer.writerow([repr(float(v)) for v in row]
                            + [positive_label if lab > 0 else negative_label])


def gen_two_gaussians(n_per_class: int, d: int = 20, center_scale: float = 0.5,
                      seed: int = 0) -> Dataset:
    """Two unit-variance Gaussian classes centred at +-center_scale * 1.

    Negative class rows come first; deterministic given the seed.
    """
    if n_per_class < 1 or d < 1:
        raise InvalidParameterError("n_per_class and d must be positive")
    rng = rng_stream(seed, 0x26)
    Xneg = rng.standard_normal((n_per_class, d)) - center_scale
    Xpos = rng.standard_normal((n_per_class, d)) + center_scale
    X = np.vstack([Xneg, Xpos])
    y = np.concatenate([-np.ones(n_per_class), np.ones(n_per_class)])
    return Dataset(X, y, source=f"two_gaussians(n={n_per_class},d={d},c={center_scale},seed={seed})")


@dataclass
class ExperimentReport:
    name: str
    params: dict
    rows: list[dict]
    summary: dict = field(default_factory=dict)
    seed: int = 0

    @property
    def columns(self) -> list[str]:
        return list(self.rows[0].keys()) if self.rows else []


def _format_cell(value):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def save_report(report: ExperimentReport, path) -> None:
    if not report.rows:
        raise DataError("refusing to write an empty report")
    columns = report.columns
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in report.rows:
            if list(row.keys()) != columns:
                raise DataError("report rows have inconsistent columns")
            writer.writerow([_format_cell(row[c]) for c in columns])


def _parse_cell(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    if text == "True":
        return True
    if text == "False":
        return False
    return text


def load_report_rows(path) -> list[dict]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty report") from None
        return [dict(zip(header, map(_parse_cell, row))) for row in reader]

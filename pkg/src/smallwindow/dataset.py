"""Time-ordered process data: loading, alignment and the preparation steps
used for the benchmark series (label lag, duplicate-label jitter, prefix
split)."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .numeric import ContractError, as_matrix, as_vector


class DatasetLoadError(ValueError):
    """The input file does not satisfy the CSV contract."""


@dataclass(frozen=True)
class Dataset:
    """Sensor matrix ``X`` (rows are time-ordered samples) and property ``y``."""

    name: str
    X: np.ndarray
    y: np.ndarray
    column_names: tuple[str, ...] = ()
    y_name: str = "y"
    sample_interval: float | None = None

    def __post_init__(self):
        X = as_matrix(self.X, "X")
        y = as_vector(self.y, "y")
        if X.shape[0] != y.shape[0]:
            raise ContractError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
        if y.shape[0] < 2:
            raise ContractError("a dataset needs at least 2 samples")
        names = tuple(self.column_names) or tuple(f"x{j}" for j in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise ContractError("column_names does not match the number of columns")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "column_names", names)

    @property
    def n_samples(self) -> int:
        return self.y.shape[0]

    @property
    def n_variables(self) -> int:
        return self.X.shape[1]

    # The harness reads labels only through these two methods so that
    # causality can be audited by overriding them.
    def labels(self, start: int, stop: int) -> np.ndarray:
        return self.y[start:stop]

    def label(self, t: int) -> float:
        return float(self.y[t])

    def replace(self, **changes) -> "Dataset":
        fields = dict(
            name=self.name, X=self.X, y=self.y, column_names=self.column_names,
            y_name=self.y_name, sample_interval=self.sample_interval,
        )
        fields.update(changes)
        return Dataset(**fields)


@dataclass(frozen=True)
class SplitSpec:
    validation_fraction: float

    def __post_init__(self):
        if not 0.0 < self.validation_fraction < 1.0:
            raise ContractError("validation_fraction must lie in (0, 1)")


def _parse_float(text: str, path, lineno: int, column: str) -> float:
    if text.strip() == "":
        raise DatasetLoadError(f"{path}:{lineno}: blank cell in column {column!r}")
    try:
        value = float(text)
    except ValueError:
        raise DatasetLoadError(
            f"{path}:{lineno}: non-numeric value {text!r} in column {column!r}"
        ) from None
    if not math.isfinite(value):
        raise DatasetLoadError(f"{path}:{lineno}: non-finite value in column {column!r}")
    return value


def load_csv(path, y_column: str | int, name: str | None = None, exclude=()) -> Dataset:
    """Read a headered numeric CSV; ``y_column`` is a header name or index.

    Every other column not named in ``exclude`` becomes a sensor column, in
    file order.  ``exclude`` is how a file carrying two properties (SRU H2S
    and SO2) is read one property at a time.
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetLoadError(f"{path}: no such file")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetLoadError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            raise DatasetLoadError(f"{path}:1: duplicate column names in header")
        if isinstance(y_column, int):
            if not -len(header) <= y_column < len(header):
                raise DatasetLoadError(f"{path}: y column index {y_column} out of range")
            y_idx = y_column % len(header)
        else:
            if y_column not in header:
                raise DatasetLoadError(
                    f"{path}:1: y column {y_column!r} not in header {header}"
                )
            y_idx = header.index(y_column)
        missing = [c for c in exclude if c not in header]
        if missing:
            raise DatasetLoadError(f"{path}:1: excluded columns {missing} not in header {header}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DatasetLoadError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            rows.append([_parse_float(c, path, lineno, header[j]) for j, c in enumerate(row)])
    if len(rows) < 2:
        raise DatasetLoadError(f"{path}: need at least 2 data rows, got {len(rows)}")
    data = np.array(rows, dtype=np.float64)
    x_idx = [j for j in range(len(header)) if j != y_idx and header[j] not in exclude]
    if not x_idx:
        raise DatasetLoadError(f"{path}: no sensor columns left")
    return Dataset(
        name=name or path.stem,
        X=data[:, x_idx],
        y=data[:, y_idx],
        column_names=tuple(header[j] for j in x_idx),
        y_name=header[y_idx],
    )


def write_csv(d: Dataset, path) -> Path:
    """Write ``d`` with sensor columns first and the property last.

    Floats use ``repr`` (shortest round-trip form) so a reload is bit-exact.
    """
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*d.column_names, d.y_name])
        for xrow, yv in zip(d.X.tolist(), d.y.tolist()):
            w.writerow([repr(v) for v in xrow] + [repr(yv)])
    return path


def lag_align(d: Dataset, y_lag: int) -> Dataset:
    """Pair ``y[t]`` with ``X[t - y_lag]``; the last ``y_lag`` X rows and the
    first ``y_lag`` labels have no partner and are dropped."""
    n = d.n_samples
    if not 0 <= y_lag < n:
        raise ContractError(f"y_lag must lie in [0, {n}), got {y_lag}")
    if y_lag == 0:
        return d
    return d.replace(X=d.X[: n - y_lag], y=d.y[y_lag:])


def jitter_duplicate_y(d: Dataset, epsilon: float = 1e-6) -> Dataset:
    """Single forward pass offsetting repeated labels by ``epsilon``.

    A label is bumped to ``adjusted[t-1] + epsilon`` when it repeats the raw
    previous label or collides with the adjusted one, so a run of repeats
    v, v, v becomes v, v+eps, v+2*eps.
    """
    if not epsilon > 0:
        raise ContractError("epsilon must be positive")
    raw = d.y.tolist()
    out = list(raw)
    for t in range(1, len(raw)):
        if raw[t] == raw[t - 1] or raw[t] == out[t - 1]:
            out[t] = out[t - 1] + epsilon
    return d.replace(y=np.array(out))


def split_prefix(d: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    n = d.n_samples
    # the small slack keeps e.g. 0.07 * 100 from rounding up to 8
    n_val = math.ceil(spec.validation_fraction * n - 1e-9)
    if n_val < 2 or n - n_val < 2:
        raise ContractError(
            f"fraction {spec.validation_fraction} of {n} samples leaves fewer than 2 on a side"
        )
    head = d.replace(name=f"{d.name}[validation]", X=d.X[:n_val], y=d.y[:n_val])
    tail = d.replace(name=f"{d.name}[remainder]", X=d.X[n_val:], y=d.y[n_val:])
    return head, tail

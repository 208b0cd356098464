"""Sample container and CSV ingestion with coordinatewise transforms."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr
from scipy.stats import rankdata

__all__ = ["Sample", "load_csv"]

TRANSFORMS = ("none", "normal_cdf", "rank")


def _as_matrix(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise ValueError(f"{name} must be 1- or 2-dimensional")
    return a


@dataclass(frozen=True)
class Sample:
    """n observations of (x, y, z), stored as (n, dim) float arrays."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _as_matrix(self.x, "x"))
        object.__setattr__(self, "y", _as_matrix(self.y, "y"))
        object.__setattr__(self, "z", _as_matrix(self.z, "z"))
        if not (self.x.shape[0] == self.y.shape[0] == self.z.shape[0]):
            raise ValueError("x, y and z must have the same number of rows")
        if self.x.shape[0] < 1:
            raise ValueError("sample must contain at least one row")

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d_x(self) -> int:
        return self.x.shape[1]

    @property
    def d_y(self) -> int:
        return self.y.shape[1]

    @property
    def d(self) -> int:
        return self.z.shape[1]


def _column_names(d_x: int, d_y: int, d: int) -> list[str]:
    return ([f"x{i + 1}" for i in range(d_x)]
            + [f"y{i + 1}" for i in range(d_y)]
            + [f"z{i + 1}" for i in range(d)])


def load_csv(path, d_x: int = 1, d_y: int = 1, d: int = 1, transform: str = "none") -> Sample:
    """Read a headered CSV into a Sample, applying a coordinatewise transform.

    The header must contain columns x1..x{d_x}, y1..y{d_y}, z1..z{d} (any
    order, extra columns ignored).  ``transform`` is one of:

    - ``none``: values must already lie in [0, 1];
    - ``normal_cdf``: apply the standard normal CDF coordinatewise;
    - ``rank``: empirical-CDF transform rank/(n+1) per column.

    Parse errors name the offending row and column.
    """
    if transform not in TRANSFORMS:
        raise ValueError(f"transform must be one of {TRANSFORMS}")
    names = _column_names(d_x, d_y, d)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [c.strip() for c in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        positions = {}
        for name in names:
            if name not in header:
                raise ValueError(f"{path}: missing column '{name}'")
            positions[name] = header.index(name)
        rows = []
        for i, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            values = []
            for name in names:
                pos = positions[name]
                if pos >= len(row):
                    raise ValueError(f"{path}: row {i}: missing value for column '{name}'")
                cell = row[pos].strip()
                try:
                    v = float(cell)
                except ValueError:
                    raise ValueError(
                        f"{path}: row {i}, column '{name}': not a number: {cell!r}"
                    ) from None
                if not np.isfinite(v):
                    raise ValueError(f"{path}: row {i}, column '{name}': non-finite value {cell!r}")
                values.append(v)
            rows.append(values)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=float)

    if transform == "normal_cdf":
        data = ndtr(data)
    elif transform == "rank":
        n = data.shape[0]
        data = np.column_stack([rankdata(col) / (n + 1) for col in data.T])
    else:
        bad = np.argwhere((data < 0.0) | (data > 1.0))
        if bad.size:
            i, j = bad[0]
            raise ValueError(
                f"{path}: row {i + 1}, column '{names[j]}': value {data[i, j]} outside [0, 1]; "
                "use --transform normal_cdf or rank for unbounded data"
            )

    return Sample(x=data[:, :d_x], y=data[:, d_x:d_x + d_y], z=data[:, d_x + d_y:])

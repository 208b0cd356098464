"""Tensor-product histogram basis on the unit cube.

The basis splits each axis of ``[0,1]^k`` into ``m`` equal cells and uses the
cell indicators as basis functions.  Intervals are right-closed, with the
first cell also closed on the left, so every point belongs to exactly one
cell and the indicators form a partition of unity with unit coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "BasisSpec",
    "cell_index",
    "cell_indices",
    "evaluate_basis",
    "partition_coefficients",
]


@dataclass(frozen=True)
class BasisSpec:
    """Histogram basis with ``cells_per_axis`` cells on each of ``var_dim`` axes."""

    var_dim: int
    cells_per_axis: int

    def __post_init__(self):
        if self.var_dim < 1:
            raise ValueError("var_dim must be a positive integer")
        if self.cells_per_axis < 1:
            raise ValueError("cells_per_axis must be a positive integer")

    @property
    def total_cells(self) -> int:
        return self.cells_per_axis**self.var_dim


def cell_indices(x: np.ndarray, spec: BasisSpec) -> np.ndarray:
    """Vectorized 1-based cell index for each row of ``x``.

    Parameters
    ----------
    x : array-like, shape (n, var_dim) or (n,)
        Points in the unit cube.
    spec : BasisSpec

    Returns
    -------
    ndarray of int, shape (n,)
        Row-major linearized cell index in ``[1, total_cells]``.  A
        coordinate lying exactly on an interior boundary belongs to the
        lower cell (right-closed intervals).
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[1] != spec.var_dim:
        raise ValueError(f"expected {spec.var_dim} coordinates, got {x.shape[1]}")
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("coordinates must lie in [0, 1]")
    m = spec.cells_per_axis
    # ceil maps (lo, hi] to the right-closed cell; 0.0 lands in cell 1.
    per_axis = np.ceil(x * m).astype(np.int64)
    np.clip(per_axis, 1, m, out=per_axis)
    linear = np.zeros(x.shape[0], dtype=np.int64)
    for j in range(spec.var_dim):
        linear = linear * m + (per_axis[:, j] - 1)
    return linear + 1


def cell_index(x, spec: BasisSpec) -> int:
    """1-based cell index of a single point (see `cell_indices`)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return int(cell_indices(x[None, :], spec)[0])


def evaluate_basis(x, spec: BasisSpec) -> np.ndarray:
    """One-hot vector of all basis functions at ``x`` (length ``total_cells``)."""
    out = np.zeros(spec.total_cells)
    out[cell_index(x, spec) - 1] = 1.0
    return out


def partition_coefficients(spec: BasisSpec) -> np.ndarray:
    """Coefficients making the basis sum to one; all ones for indicators."""
    return np.ones(spec.total_cells)

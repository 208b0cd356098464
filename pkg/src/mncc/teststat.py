"""Evaluation grid and the aggregate conditional-independence statistic.

The statistic aggregates the squared estimated conditional correlation over a
fixed grid of conditioning points,

    T = n h^d c_K sum_k fhat(z_k) rho_hat^2(z_k),

where the grid starts a margin eps = 0.143 h^0.121 from the boundary of the
unit interval and advances in steps of h0.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .basis import BasisSpec, cell_indices
from .estimator import ConditionalMoments, RhoEstimate, SingularMoments, rho_hat
from .kernel import _UNDERFLOW_FLOOR, DegenerateWeights, KernelConfig, _raw_weights, c_K

__all__ = [
    "BOUNDARY_COEF",
    "BOUNDARY_POW",
    "EmptyGrid",
    "TestConfig",
    "TestReport",
    "boundary_margin",
    "eval_points",
    "make_config",
    "statistic",
]

# Grid constants; adopted defaults, overridable through eval_points/make_config.
BOUNDARY_COEF = 0.143
BOUNDARY_POW = 0.121

# Absolute slack when testing a grid point against the upper margin, so that
# accumulated spacing noise never drops the final point.
_GRID_TOL = 1e-12


class EmptyGrid(Exception):
    """No evaluation point fits between the boundary margins."""


def boundary_margin(h: float, coef: float = BOUNDARY_COEF, power: float = BOUNDARY_POW) -> float:
    """Distance kept between the evaluation grid and the boundary of [0,1]."""
    return coef * h**power


def eval_points(h: float, h0: float, d: int = 1, coef: float = BOUNDARY_COEF,
                power: float = BOUNDARY_POW) -> np.ndarray:
    """Evaluation grid z_k = eps + (k-1) h0 inside [eps, 1-eps] per axis.

    Returns shape (n_Z,) for d=1 and the tensor grid of shape (n_Z_1d**d, d)
    for d>1.

    Raises
    ------
    EmptyGrid
        If no point fits (h0 too large for the margin).
    """
    if not 0 < h <= 0.5:
        raise ValueError("h must lie in (0, 0.5]")
    if h0 <= 0:
        raise ValueError("h0 must be positive")
    if d < 1:
        raise ValueError("d must be a positive integer")
    eps = boundary_margin(h, coef, power)
    axis = []
    k = 1
    while True:
        z = eps + (k - 1) * h0
        if z > 1.0 - eps + _GRID_TOL:
            break
        axis.append(z)
        k += 1
    if not axis:
        raise EmptyGrid(f"no grid point in [{eps:.6f}, {1 - eps:.6f}] with spacing {h0}")
    axis = np.array(axis)
    if d == 1:
        return axis
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


@dataclass(frozen=True)
class TestConfig:
    """Resolved parameters of one test run."""

    h: float
    h0: float
    eps: float
    z_points: np.ndarray
    p: int = 2
    q: int = 2
    alpha: float = 0.05
    seed: int = 0
    method: str = "asymptotic"

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.method not in ("asymptotic", "normal", "bootstrap"):
            raise ValueError(f"unknown method {self.method!r}")
        if len(self.z_points) < 1:
            raise ValueError("z_points must be nonempty")

    @property
    def n_z(self) -> int:
        return len(self.z_points)

    @property
    def d(self) -> int:
        z = np.asarray(self.z_points)
        return 1 if z.ndim == 1 else z.shape[1]


def make_config(h: float, h0: float, d: int = 1, p: int = 2, q: int = 2, alpha: float = 0.05,
                seed: int = 0, method: str = "asymptotic") -> TestConfig:
    """Build a TestConfig with the standard grid for the given h, h0."""
    z_points = eval_points(h, h0, d)
    if h0 < h:
        warnings.warn(
            f"grid spacing h0={h0} is below the bandwidth h={h}; "
            "neighbouring evaluation points will be strongly dependent",
            stacklevel=2,
        )
    return TestConfig(h=h, h0=h0, eps=boundary_margin(h), z_points=z_points,
                      p=p, q=q, alpha=alpha, seed=seed, method=method)


@dataclass
class TestReport:
    """Statistic, per-point estimates and (once decided) the verdict."""

    statistic: float
    per_point: list
    config_echo: TestConfig
    critical_value: Optional[float] = None
    p_value: Optional[float] = None
    reject: Optional[bool] = None
    null_summary: object = None
    failed_resamples: int = 0
    extras: dict = field(default_factory=dict)


def _cells_per_axis(total: int, dim: int, name: str) -> int:
    m = round(total ** (1.0 / dim))
    for cand in (m - 1, m, m + 1):
        if cand >= 1 and cand**dim == total:
            return cand
    raise ValueError(f"{name}={total} is not a perfect {dim}-th power for a {dim}-d variable")


def statistic(sample, cfg: TestConfig) -> TestReport:
    """Aggregate statistic T = n h^d c_K sum_k fhat(z_k) rho^2(z_k).

    Estimator failures carry the offending grid point on the raised
    exception's ``z`` attribute.
    """
    n = sample.n
    d = sample.d
    kcfg = KernelConfig(bandwidth=cfg.h, z_dim=d)
    bx = BasisSpec(sample.d_x, _cells_per_axis(cfg.p, sample.d_x, "p"))
    by = BasisSpec(sample.d_y, _cells_per_axis(cfg.q, sample.d_y, "q"))
    p, q = bx.total_cells, by.total_cells
    cx = cell_indices(sample.x, bx) - 1
    cy = cell_indices(sample.y, by) - 1

    z_points = np.atleast_1d(np.asarray(cfg.z_points, dtype=float))
    if z_points.ndim == 1:
        z_points = z_points[:, None]

    per_point = []
    total = 0.0
    for zk in z_points:
        w0 = _raw_weights(zk, sample.z, kcfg)
        s = w0.sum()
        if s < _UNDERFLOW_FLOOR * n:
            raise DegenerateWeights(zk, cfg.h)
        fz = float(s / (n * cfg.h**d))
        w = w0 / s
        v11 = np.diag(np.bincount(cx, weights=w, minlength=p))
        v22 = np.diag(np.bincount(cy, weights=w, minlength=q))
        v12 = np.bincount(cx * q + cy, weights=w, minlength=p * q).reshape(p, q)
        moments = ConditionalMoments(v11=v11, v12=v12, v22=v22)
        try:
            rho, raw = rho_hat(moments, np.ones(p))
        except SingularMoments as exc:
            exc.z = zk
            raise
        per_point.append(RhoEstimate(rho=rho, rho_squared_raw=raw, fz_hat=fz, z=zk.copy()))
        total += fz * min(1.0, max(0.0, raw))

    T = n * cfg.h**d * c_K(d) * total
    return TestReport(statistic=float(T), per_point=per_point, config_echo=cfg)

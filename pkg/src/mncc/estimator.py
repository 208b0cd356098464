"""Maximal nonlinear conditional correlation restricted to a finite basis.

At a point z the estimator forms kernel-weighted conditional moment matrices
of the basis expansions of X and Y,

    V11 = Ehat(phi(X) phi(X)^T | Z=z),
    V12 = Ehat(phi(X) psi(Y)^T | Z=z),
    V22 = Ehat(psi(Y) psi(Y)^T | Z=z),

and returns the largest nontrivial canonical correlation between the two
expansions.  Production path: second-largest singular value of the whitened
cross-moment matrix B = V11^{-1/2} V12 V22^{-1/2} (its top singular value is
the trivial constant pair at 1).  The equivalent non-symmetric eigenproblem

    V12 V22^{-1} V21 V11^{-1} - V11 a a^T

is kept as a cross-check oracle; both agree to floating precision on
well-conditioned inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisSpec, cell_indices
from .kernel import KernelConfig, normalized_weights

__all__ = [
    "ConditionalMoments",
    "RhoEstimate",
    "SingularMoments",
    "estimate_moments",
    "g_matrix",
    "rho_hat",
    "rho_hat_eigen",
    "rho_population_bvn",
]

#: Relative ridge added to V11/V22 diagonals before inversion; finite samples
#: can leave basis cells empty, which would make the moment matrices singular.
RIDGE_SCALE = 1e-10

#: Condition-number ceiling beyond which the moments are reported as singular.
MAX_CONDITION = 1e12


class SingularMoments(Exception):
    """A regularized conditional moment matrix is numerically singular."""

    def __init__(self, message: str, z=None):
        self.z = z
        super().__init__(message)


@dataclass(frozen=True)
class ConditionalMoments:
    """Conditional second-moment matrices of the basis expansions at one z."""

    v11: np.ndarray  # (p, p) symmetric
    v12: np.ndarray  # (p, q)
    v22: np.ndarray  # (q, q) symmetric

    @property
    def p(self) -> int:
        return self.v11.shape[0]

    @property
    def q(self) -> int:
        return self.v22.shape[0]


@dataclass(frozen=True)
class RhoEstimate:
    """Estimated conditional correlation at one grid point."""

    rho: float
    rho_squared_raw: float
    fz_hat: float
    z: np.ndarray


def estimate_moments(sample, bx: BasisSpec, by: BasisSpec, z, cfg: KernelConfig) -> ConditionalMoments:
    """Kernel plug-in estimate of the conditional moment matrices at ``z``.

    For the one-hot histogram basis the products of basis functions are again
    indicators, so V11 and V22 are diagonal weighted histograms and V12 is the
    weighted contingency table of (X-cell, Y-cell).
    """
    w = normalized_weights(z, sample.z, cfg)
    p, q = bx.total_cells, by.total_cells
    cx = cell_indices(sample.x, bx) - 1
    cy = cell_indices(sample.y, by) - 1
    v11 = np.diag(np.bincount(cx, weights=w, minlength=p))
    v22 = np.diag(np.bincount(cy, weights=w, minlength=q))
    v12 = np.bincount(cx * q + cy, weights=w, minlength=p * q).reshape(p, q)
    return ConditionalMoments(v11=v11, v12=v12, v22=v22)


def _ridged(mat: np.ndarray, ridge) -> np.ndarray:
    if ridge is None:
        ridge = RIDGE_SCALE * np.trace(mat) / mat.shape[0]
    return mat + float(ridge) * np.eye(mat.shape[0])


def _check_condition(mat: np.ndarray, name: str) -> None:
    c = np.linalg.cond(mat)
    if not np.isfinite(c) or c > MAX_CONDITION:
        raise SingularMoments(f"{name} has condition number {c:.3e} > {MAX_CONDITION:.0e}")


def g_matrix(m: ConditionalMoments, a_star: np.ndarray, ridge=None) -> np.ndarray:
    """V12 (V22+r I)^{-1} V21 (V11+r I)^{-1} - V11 a a^T.

    ``ridge=None`` uses the default relative ridge per matrix; pass 0.0 for
    the unregularized matrix when the moments are known to be invertible.
    """
    a = np.asarray(a_star, dtype=float)
    v11r = _ridged(m.v11, ridge)
    v22r = _ridged(m.v22, ridge)
    _check_condition(v11r, "V11")
    _check_condition(v22r, "V22")
    left = m.v12 @ np.linalg.solve(v22r, m.v12.T)
    # right-multiply by (V11+r I)^{-1} via a solve against the symmetric matrix
    core = np.linalg.solve(v11r, left.T).T
    return core - m.v11 @ np.outer(a, a)


def _inv_sqrt_spd(mat: np.ndarray, name: str) -> np.ndarray:
    vals, vecs = np.linalg.eigh(mat)
    if vals[-1] <= 0 or vals[0] <= 0 or vals[-1] / vals[0] > MAX_CONDITION:
        raise SingularMoments(f"{name} is not safely positive definite")
    return (vecs * (1.0 / np.sqrt(vals))) @ vecs.T


def rho_hat(m: ConditionalMoments, a_star: np.ndarray, ridge=None) -> tuple[float, float]:
    """Estimated correlation at one point: ``(rho, rho_squared_raw)``.

    ``rho_squared_raw`` is the squared second-largest singular value of the
    whitened cross-moment matrix (equal, up to floating error, to the largest
    eigenvalue of `g_matrix`); ``rho`` is its square root after clipping the
    square to [0, 1].
    """
    del a_star  # partition-of-unity coefficients define the deflated direction implicitly
    v11r = _ridged(m.v11, ridge)
    v22r = _ridged(m.v22, ridge)
    s11 = _inv_sqrt_spd(v11r, "V11")
    s22 = _inv_sqrt_spd(v22r, "V22")
    sv = np.linalg.svd(s11 @ m.v12 @ s22, compute_uv=False)
    raw = float(sv[1] ** 2) if sv.size >= 2 else 0.0
    rho = float(np.sqrt(min(1.0, max(0.0, raw))))
    return rho, raw


def rho_hat_eigen(m: ConditionalMoments, a_star: np.ndarray, ridge=None) -> float:
    """Cross-check route: largest real eigenvalue of the non-symmetric g matrix.

    The matrix is similar to a symmetric PSD one in exact arithmetic, so the
    leading eigenvalue must be essentially real; a complex leading eigenvalue
    signals numerically inconsistent moments.
    """
    vals = np.linalg.eigvals(g_matrix(m, a_star, ridge))
    lead = vals[np.argmax(vals.real)]
    if abs(lead.imag) >= 1e-8:
        raise ArithmeticError(f"leading eigenvalue has imaginary part {lead.imag:.3e}")
    return float(lead.real)


def rho_population_bvn(rho_xy: float) -> float:
    """Two-cell population correlation for a standard bivariate normal pair.

    With cells split at the median, the only nonconstant basis functions are
    the indicators 1{X0 <= 0} and 1{Y0 <= 0}, whose absolute correlation under
    correlation ``rho_xy`` is (2/pi) * asin(|rho_xy|) by the orthant
    probability 1/4 + asin(rho)/(2*pi).
    """
    r = float(rho_xy)
    if abs(r) > 1.0:
        raise ValueError("rho_xy must lie in [-1, 1]")
    return float((2.0 / np.pi) * np.arcsin(abs(r)))

"""Gaussian product kernel, density estimate and conditional-expectation weights.

Conventions:
    k0(u)   = prod_j phi(u_j)          standard normal density per axis
    k_h(u)  = h^{-d} k0(u / h)
    fhat(z) = (n h^d)^{-1} sum_i k0((z - Z_i)/h)
    Ehat(g | Z=z) = sum_i w_i(z) g_i,  w_i(z) = k0((z - Z_i)/h) / sum_j k0(...)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "KernelConfig",
    "DegenerateWeights",
    "gaussian_product_kernel",
    "c_K",
    "kde",
    "cond_expect",
    "normalized_weights",
]

# Underflow guard: the Gaussian kernel is strictly positive, so an all-zero
# weight vector can only be floating-point underflow and must surface loudly.
_UNDERFLOW_FLOOR = 1e-300


class DegenerateWeights(Exception):
    """All kernel weights underflowed at the requested point."""

    def __init__(self, z, bandwidth: float):
        self.z = np.atleast_1d(np.asarray(z, dtype=float))
        self.bandwidth = float(bandwidth)
        super().__init__(
            f"kernel weights underflowed at z={self.z.tolist()} with h={bandwidth}; "
            "evaluation point is too far from the data for this bandwidth"
        )


@dataclass(frozen=True)
class KernelConfig:
    """Bandwidth and conditioning-variable dimension."""

    bandwidth: float
    z_dim: int = 1

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")
        if self.z_dim < 1:
            raise ValueError("z_dim must be a positive integer")


def gaussian_product_kernel(u) -> float:
    """Product of standard normal densities over the coordinates of ``u``."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    d = u.shape[-1] if u.ndim > 1 else u.size
    return float((2.0 * np.pi) ** (-0.5 * d) * np.exp(-0.5 * np.sum(u * u, axis=-1)))


def c_K(d: int) -> float:
    """Reciprocal of the kernel's squared integral: (2*sqrt(pi))^d."""
    if d < 1:
        raise ValueError("d must be a positive integer")
    return float((2.0 * np.sqrt(np.pi)) ** d)


def _raw_weights(z, z_samples: np.ndarray, cfg: KernelConfig) -> np.ndarray:
    """Unnormalized kernel weights k0((z - Z_i)/h) for all samples."""
    zs = np.asarray(z_samples, dtype=float)
    if zs.ndim == 1:
        zs = zs[:, None]
    if zs.shape[1] != cfg.z_dim:
        raise ValueError(f"z_samples have dimension {zs.shape[1]}, config says {cfg.z_dim}")
    z = np.atleast_1d(np.asarray(z, dtype=float))
    u = (z[None, :] - zs) / cfg.bandwidth
    return (2.0 * np.pi) ** (-0.5 * cfg.z_dim) * np.exp(-0.5 * np.sum(u * u, axis=1))


def kde(z, z_samples, cfg: KernelConfig) -> float:
    """Kernel density estimate fhat(z) = (n h^d)^{-1} sum_i k0((z - Z_i)/h)."""
    w0 = _raw_weights(z, z_samples, cfg)
    n = w0.size
    return float(w0.sum() / (n * cfg.bandwidth**cfg.z_dim))


def normalized_weights(z, z_samples, cfg: KernelConfig) -> np.ndarray:
    """Nadaraya-Watson weights at ``z``; they are nonnegative and sum to one.

    Raises
    ------
    DegenerateWeights
        If every raw weight underflowed to (numerical) zero.
    """
    w0 = _raw_weights(z, z_samples, cfg)
    s = w0.sum()
    if s < _UNDERFLOW_FLOOR * w0.size:
        raise DegenerateWeights(z, cfg.bandwidth)
    return w0 / s


def cond_expect(g_values, z, z_samples, cfg: KernelConfig) -> float:
    """Kernel estimate of E(g(X,Y) | Z=z) as a weighted average of ``g_values``."""
    g = np.asarray(g_values, dtype=float)
    w = normalized_weights(z, z_samples, cfg)
    if g.shape[0] != w.shape[0]:
        raise ValueError("g_values and z_samples must have the same length")
    return float(w @ g)

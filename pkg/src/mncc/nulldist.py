"""Monte-Carlo null law of the statistic and the two decision rules.

Under conditional independence the statistic behaves like a sum of n_Z
independent copies of the largest eigenvalue of C C^T, where C is a
(p-1) x (q-1) matrix of i.i.d. standard normals.  For p = q = 2 a single
copy is chi-square with one degree of freedom, so the sum is chi-square
with n_Z degrees of freedom.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from ._rng import child_rng

__all__ = [
    "NullDistSummary",
    "sample_lambda",
    "null_quantile",
    "null_moments",
    "summarize_null",
    "decide_test1",
    "decide_test1n",
]

# Monte-Carlo draws are produced in fixed-size chunks; chunk c is generated
# from the stream (seed, c), so the result is independent of execution order
# and of how chunks are distributed over workers.
_CHUNK = 8192


def _lambda_chunk(p: int, q: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` draws of the largest eigenvalue of C C^T."""
    c = rng.standard_normal((size, p - 1, q - 1))
    if p == 2 and q == 2:
        return c[:, 0, 0] ** 2
    sv = np.linalg.svd(c, compute_uv=False)
    return sv[:, 0] ** 2


def sample_lambda(p: int, q: int, rng: np.random.Generator) -> float:
    """One draw of the largest eigenvalue of C C^T, C ~ (p-1)x(q-1) std normal."""
    if p < 2 or q < 2:
        raise ValueError("p and q must be at least 2")
    return float(_lambda_chunk(p, q, 1, rng)[0])


def _lambda_draws(p: int, q: int, total: int, seed: int) -> np.ndarray:
    if p < 2 or q < 2:
        raise ValueError("p and q must be at least 2")
    out = np.empty(total)
    for c0, start in enumerate(range(0, total, _CHUNK)):
        size = min(_CHUNK, total - start)
        out[start:start + size] = _lambda_chunk(p, q, size, child_rng(seed, c0))
    return out


def null_sums(n_z: int, p: int, q: int, mc: int, seed: int) -> np.ndarray:
    """``mc`` independent draws of sum_{k=1..n_z} lambda_k."""
    if n_z < 1:
        raise ValueError("n_z must be at least 1")
    return _lambda_draws(p, q, mc * n_z, seed).reshape(mc, n_z).sum(axis=1)


def null_quantile(n_z: int, p: int, q: int, level: float, mc: int = 100_000, seed: int = 0) -> float:
    """Empirical ``level``-quantile of the null sum; deterministic given seed."""
    if mc < 10_000:
        raise ValueError("mc must be at least 10^4")
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    return float(np.quantile(null_sums(n_z, p, q, mc, seed), level))


def null_moments(p: int, q: int, mc: int = 100_000, seed: int = 0) -> tuple[float, float]:
    """Sample mean and variance of lambda over ``mc`` draws."""
    if mc < 10_000:
        raise ValueError("mc must be at least 10^4")
    draws = _lambda_draws(p, q, mc, seed)
    return float(draws.mean()), float(draws.var(ddof=1))


@dataclass(frozen=True)
class NullDistSummary:
    """Quantiles and moments of the Monte-Carlo null distribution."""

    p: int
    q: int
    n_z: int
    mc_samples: int
    quantiles: dict = field(default_factory=dict)
    mu: float = 0.0
    sigma2: float = 0.0
    seed: int = 0


def summarize_null(n_z: int, p: int, q: int, mc: int = 100_000, seed: int = 0,
                   levels: tuple = (0.5, 0.9, 0.95, 0.99)) -> NullDistSummary:
    """Quantiles of the null sum plus the single-draw moments."""
    sums = null_sums(n_z, p, q, mc, seed)
    quantiles = {float(lv): float(np.quantile(sums, lv)) for lv in levels}
    mu, sigma2 = null_moments(p, q, mc, seed)
    return NullDistSummary(p=p, q=q, n_z=n_z, mc_samples=mc, quantiles=quantiles,
                           mu=mu, sigma2=sigma2, seed=seed)


def decide_test1(T: float, crit: float) -> bool:
    """Quantile rule: reject iff the statistic strictly exceeds the critical value."""
    return bool(T > crit)


def decide_test1n(T: float, n_z: int, mu: float, sigma2: float, alpha: float) -> tuple[float, bool]:
    """Normal-approximation rule: standardized score and its (non-strict) verdict."""
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    z = (T - n_z * mu) / np.sqrt(n_z * sigma2)
    return float(z), bool(z >= ndtri(1.0 - alpha))

"""Data generators for the three simulation models and the power-study harness.

Models (all with scalar X, Y, Z):

- M1: Z ~ Uniform[0,1]; X = Phi(Z e1), Y = Phi(Z e2) with e1, e2 ~ N(0,1)
  independent of Z.  X and Y are conditionally independent given Z.
- M2: Z ~ N(0,1); (X, Y) | Z=z bivariate normal with unit variances and
  correlation a |1 - 2 Phi(z)|.  Tests run on the Phi-transformed sample.
- M3: Z0 ~ t(1); (X0, Y0) | Phi(Z0)=z bivariate normal with correlation
  a |1 - 2 z|; the sample is (Phi(X0), Phi(Y0), Phi(Z0)).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import ndtr

from ._rng import child_rng, derived_int_seed
from .bootstrap import BootstrapConfig, bootstrap_test
from .data import Sample
from .kernel import DegenerateWeights
from .estimator import SingularMoments
from .nulldist import decide_test1, decide_test1n, null_moments, null_quantile
from .teststat import TestConfig, statistic

__all__ = [
    "ModelSpec",
    "PowerStudyResult",
    "gen_m1",
    "gen_m2",
    "gen_m3",
    "sample_for_test",
    "power_study",
]

MODELS = ("M1", "M2", "M3")


@dataclass(frozen=True)
class ModelSpec:
    """Which model to draw from, its dependence strength and sample size."""

    model: str
    n: int
    a: float = 0.0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}")
        if not 0.0 <= self.a <= 1.0:
            raise ValueError("a must lie in [0, 1]")
        if self.n < 1:
            raise ValueError("n must be at least 1")


def gen_m1(n: int, rng: np.random.Generator) -> Sample:
    """Conditionally independent null model on the unit cube."""
    z = rng.random(n)
    x = ndtr(z * rng.standard_normal(n))
    y = ndtr(z * rng.standard_normal(n))
    return Sample(x=x, y=y, z=z)


def _bvn_pair(rho: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    # exact conditional sampling: Y = rho X + sqrt(1 - rho^2) e
    x0 = rng.standard_normal(rho.shape[0])
    y0 = rho * x0 + np.sqrt(1.0 - rho * rho) * rng.standard_normal(rho.shape[0])
    return x0, y0


def gen_m2(n: int, a: float, rng: np.random.Generator) -> tuple[Sample, Sample]:
    """Raw sample and its Phi-transformed companion; the tests use the latter."""
    z = rng.standard_normal(n)
    rho = a * np.abs(1.0 - 2.0 * ndtr(z))
    x0, y0 = _bvn_pair(rho, rng)
    raw = Sample(x=x0, y=y0, z=z)
    transformed = Sample(x=ndtr(x0), y=ndtr(y0), z=ndtr(z))
    return raw, transformed


def gen_m3(n: int, a: float, rng: np.random.Generator) -> Sample:
    """Heavy-tailed conditioning variable; already in unit-cube coordinates."""
    z0 = rng.standard_cauchy(n)
    u = ndtr(z0)
    rho = a * np.abs(1.0 - 2.0 * u)
    x0, y0 = _bvn_pair(rho, rng)
    return Sample(x=ndtr(x0), y=ndtr(y0), z=u)


def sample_for_test(spec: ModelSpec, rng: np.random.Generator) -> Sample:
    """Draw one sample in test coordinates (all columns in [0,1])."""
    if spec.model == "M1":
        return gen_m1(spec.n, rng)
    if spec.model == "M2":
        return gen_m2(spec.n, spec.a, rng)[1]
    return gen_m3(spec.n, spec.a, rng)


@dataclass(frozen=True)
class PowerStudyResult:
    """Rejection count of one test over independent replicate samples."""

    model_spec: ModelSpec
    test_method: str
    reps: int
    rejections: int
    rate: float
    seed: int
    runtime: float
    failures: int = 0


def power_study(spec: ModelSpec, cfg: TestConfig, method: str = "asymptotic",
                reps: int = 100, seed: int = 0, bcfg: BootstrapConfig | None = None,
                mc: int = 100_000, threads: int = 1) -> PowerStudyResult:
    """Rejection rate of the chosen test over ``reps`` independent samples.

    Replicate r draws its sample from the stream (seed, 0, r); the shared
    null Monte Carlo uses the stream (seed, 1).  Estimator failures are
    excluded from the rejection count and reported in ``failures``.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    t0 = time.perf_counter()

    crit = mu = sigma2 = None
    if method == "asymptotic":
        crit = null_quantile(cfg.n_z, cfg.p, cfg.q, 1.0 - cfg.alpha, mc=mc,
                             seed=derived_int_seed(seed, 1))
    elif method == "normal":
        mu, sigma2 = null_moments(cfg.p, cfg.q, mc=mc, seed=derived_int_seed(seed, 1))
    elif method != "bootstrap":
        raise ValueError(f"unknown method {method!r}")
    if method == "bootstrap" and bcfg is None:
        bcfg = BootstrapConfig()

    def run_one(r: int) -> tuple[bool, bool]:
        rng = child_rng(seed, 0, r)
        sample = sample_for_test(spec, rng)
        try:
            if method == "bootstrap":
                rep = bootstrap_test(sample, cfg, replace(bcfg, seed=derived_int_seed(seed, 0, r, 1)))
                return bool(rep.reject), False
            T = statistic(sample, cfg).statistic
            if method == "asymptotic":
                return decide_test1(T, crit), False
            return decide_test1n(T, cfg.n_z, mu, sigma2, cfg.alpha)[1], False
        except (DegenerateWeights, SingularMoments):
            return False, True

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(run_one, range(reps)))
    else:
        outcomes = [run_one(r) for r in range(reps)]

    rejections = sum(rej for rej, _ in outcomes)
    failures = sum(fail for _, fail in outcomes)
    return PowerStudyResult(model_spec=spec, test_method=method, reps=reps,
                            rejections=rejections, rate=rejections / reps, seed=seed,
                            runtime=time.perf_counter() - t0, failures=failures)

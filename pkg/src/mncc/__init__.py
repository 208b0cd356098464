"""Conditional independence testing via maximal nonlinear conditional correlation.

The test measures, at each point z of an evaluation grid, the largest
canonical correlation between histogram-basis expansions of X and Y under the
kernel-weighted conditional law given Z = z, and aggregates the squared
correlations into a statistic whose null distribution is a sum of largest
eigenvalues of small Wishart matrices.
"""

from .basis import BasisSpec, cell_index, cell_indices, evaluate_basis, partition_coefficients
from .bootstrap import BootstrapConfig, bootstrap_test, local_bootstrap_resample
from .data import Sample, load_csv
from .estimator import (
    ConditionalMoments,
    RhoEstimate,
    SingularMoments,
    estimate_moments,
    g_matrix,
    rho_hat,
    rho_hat_eigen,
    rho_population_bvn,
)
from .kernel import DegenerateWeights, KernelConfig, c_K, cond_expect, gaussian_product_kernel, kde
from .nulldist import (
    NullDistSummary,
    decide_test1,
    decide_test1n,
    null_moments,
    null_quantile,
    sample_lambda,
    summarize_null,
)
from .simulate import ModelSpec, PowerStudyResult, gen_m1, gen_m2, gen_m3, power_study, sample_for_test
from .teststat import EmptyGrid, TestConfig, TestReport, boundary_margin, eval_points, make_config, statistic
from .tuning import (
    CalibrationFailed,
    TuningResult,
    calibrate,
    ks_statistic,
    mise_uniform,
    select_bandwidth,
    select_h0,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BasisSpec", "cell_index", "cell_indices", "evaluate_basis", "partition_coefficients",
    "KernelConfig", "DegenerateWeights", "gaussian_product_kernel", "c_K", "kde", "cond_expect",
    "ConditionalMoments", "RhoEstimate", "SingularMoments", "estimate_moments",
    "g_matrix", "rho_hat", "rho_hat_eigen", "rho_population_bvn",
    "EmptyGrid", "TestConfig", "TestReport", "boundary_margin", "eval_points", "make_config", "statistic",
    "NullDistSummary", "sample_lambda", "null_quantile", "null_moments", "summarize_null",
    "decide_test1", "decide_test1n",
    "BootstrapConfig", "local_bootstrap_resample", "bootstrap_test",
    "CalibrationFailed", "TuningResult", "mise_uniform", "select_bandwidth",
    "ks_statistic", "select_h0", "calibrate",
    "ModelSpec", "PowerStudyResult", "gen_m1", "gen_m2", "gen_m3", "sample_for_test", "power_study",
    "Sample", "load_csv",
]

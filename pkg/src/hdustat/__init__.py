"""High-dimensional vector-valued U-statistics: sequential processes, jackknife
covariance, Brownian-bridge change-point detection and a self-normalised
relevant test."""
from .cpdetect import (
    CusumResult,
    DriftSpec,
    check_geometric_constraints,
    cusum_process,
    cusum_statistic,
    detect_change,
    drift_V,
)
from .errors import (
    ConfigError,
    DataError,
    DegeneracyError,
    DegeneratePairError,
    HdustatError,
    InputError,
    UnsupportedPairError,
)
from .gaussmc import (
    BridgePathSet,
    RngSpec,
    brownian_bridge_sups,
    gaussian_partial_sums,
    psd_sqrt,
    sn_limit_sample,
    sup_quantile,
)
from .kernels import KernelFamily, KernelSpec, Marginal, closed_form_theta, eval_kernel, kernel_dimension
from .sample import Sample, SeqPath
from .sntest import RelevantTestConfig, SNReport, distance_process, run_relevant_test, self_normalizer
from .useq import (
    CovarianceEstimate,
    covariance_estimate,
    full_ustat,
    jackknife_projections,
    sequential_T,
)

__version__ = "0.1.0"

"""Distribution-free goodness-of-fit tests for regression errors."""
from .errors import (
    ConfigurationError,
    DegenerateSampleError,
    DomainError,
    EmptyWindowError,
    ExperimentError,
    FamilySpecError,
    IllConditionedError,
    KhmgofError,
    TailOverflowError,
)
from .families import Laplace, Logistic, Normal, StudentT, parse_family
from .harness import (
    BridgeCheckConfig,
    ExperimentConfig,
    bridge_divergence_check,
    null_distribution_experiment,
    power_experiment,
    tail_growth_diagnostic,
)
from .kernels import BACKEND
from .paths import ProcessPath
from .regression import Sample, compute_residuals, estimated_empirical_process, nw_fit, scale_estimate
from .supstats import TestReport, critical_value, p_value, sup_abs_bm_cdf, sup_statistic
from .transform import (
    K_direct,
    gamma_matrix,
    scale_transform_path,
    transform_path,
    weighted_norm,
)

__version__ = "0.1.0"

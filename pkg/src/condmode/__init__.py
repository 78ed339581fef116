"""Kernel regression by the mode of the conditional density."""

from .conditioning import ConditionalMixture, PruneConfig, condition, conditional_density
from .density import (
    JointKernelModel,
    Mixture,
    gaussian_kernel,
    joint_density,
    mixture_density,
    mixture_gradient,
    mixture_log_density,
)
from .errors import DegenerateDataError, OutsideSupportError, UsageError
from .mode_search import (
    AscentConfig,
    ModeResult,
    SearchConfig,
    categorical_draw,
    find_mode,
    gradient_ascent,
    sample_mixture,
)
from .regression import (
    Dataset,
    RegressorConfig,
    fit_kde,
    predict_mode,
    predict_nw,
    select_bandwidth_loo,
)

__version__ = "0.1.0"

__all__ = [
    "AscentConfig",
    "ConditionalMixture",
    "Dataset",
    "DegenerateDataError",
    "JointKernelModel",
    "Mixture",
    "ModeResult",
    "OutsideSupportError",
    "PruneConfig",
    "RegressorConfig",
    "SearchConfig",
    "UsageError",
    "categorical_draw",
    "condition",
    "conditional_density",
    "find_mode",
    "fit_kde",
    "gaussian_kernel",
    "gradient_ascent",
    "joint_density",
    "mixture_density",
    "mixture_gradient",
    "mixture_log_density",
    "predict_mode",
    "predict_nw",
    "sample_mixture",
    "select_bandwidth_loo",
]

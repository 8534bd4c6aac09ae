"""Condition numbers of matrix problems: closed forms, extremal
constructions, a definitional sampling estimator, backward-error analysis of
triangular solves, and random-matrix Monte Carlo experiments."""

__version__ = "0.1.0"

from .conditioning import (
    ConditionReport,
    condition_closed_form,
    distance_to_singularity,
    kappa,
    mixed_condition,
    nearest_singular_perturbation,
)
from .empirical import (
    ErrorModel,
    EstimateReport,
    EstimatorConfig,
    componentwise_max,
    componentwise_sum,
    estimate_condition,
    normwise,
    relerror,
    worst_inversion_perturbation,
)
from .linalg import (
    LUFactors,
    QLFactors,
    frobenius_norm,
    invert,
    lu_decompose,
    ql_decompose,
    singular_values,
    solve,
)
from .norms import (
    OperatorNormResult,
    dual_exponent,
    dual_witness,
    norm_index,
    operator_norm,
    rank_one_interpolator,
    vector_norm,
)
from .randomlab import ExperimentConfig, ExperimentSummary, run_experiment, sample_matrix
from .triangular import (
    REDUCED,
    WORKING,
    BackwardErrorReport,
    PrecisionMode,
    componentwise_backward_error,
    forward_substitution,
    verify_backward_stability,
)

__all__ = [name for name in dir() if not name.startswith("_")]

"""Worst-case-robust linear estimation under a Gaussian subspace model.

Closed-form robust and jittering-trained estimators, exact inner-maximum
evaluation via a one-dimensional dual, PGD attacks, minibatch training,
and Monte-Carlo robust-risk certification.
"""

from .attack import AttackConfig, pgd_attack, pgd_perturb_batch
from .errors import (
    AttackDivergenceError,
    BoundaryLimitError,
    ConfigError,
    DegenerateInputError,
    DegenerateRegimeError,
    EvaluationError,
    InvalidDimensionError,
    InvalidParameterError,
    JitterlabError,
    OutOfRegimeError,
    TrainingDivergenceError,
    UnboundedBelowError,
)
from .estimators import (
    LinearEstimator,
    ShrinkageProfile,
    conjectured_robust_estimator,
    jitter_level_for_eps,
    jittering_denoiser_alpha,
    mmse_estimator,
    optimal_jittering_estimator,
    optimal_robust_alpha,
    optimal_robust_denoiser,
    read_factored_text,
    ridge_estimator,
    write_factored_text,
    write_matrix_csv,
)
from .model import (
    ForwardOperator,
    NoiseModel,
    Sample,
    SubspaceModel,
    draw_latents,
    draw_sample_arrays,
    make_diagonal_operator,
    make_subspace,
    rng_stream,
    sample_pairs,
)
from .risk import (
    CI_SCALE,
    RiskReport,
    dual_values_batch,
    inner_max_dual,
    jittering_risk_closed_form,
    residuals,
    robust_risk_curve,
    robust_risk_exact,
    robust_risk_mode_form,
    standard_risk_closed_form,
    worst_case_perturbation_projection,
)
from .scalar import ScalarProblem, minimize_convex
from .training import (
    SweepResult,
    TrainConfig,
    TrainTrace,
    sweep_jitter_levels,
    train,
)
from .experiments import best_jitter_level_analytic

__version__ = "0.1.0"

__all__ = [
    "CI_SCALE",
    "AttackConfig",
    "AttackDivergenceError",
    "BoundaryLimitError",
    "ConfigError",
    "DegenerateInputError",
    "DegenerateRegimeError",
    "EvaluationError",
    "ForwardOperator",
    "InvalidDimensionError",
    "InvalidParameterError",
    "JitterlabError",
    "LinearEstimator",
    "NoiseModel",
    "OutOfRegimeError",
    "RiskReport",
    "Sample",
    "ScalarProblem",
    "ShrinkageProfile",
    "SubspaceModel",
    "SweepResult",
    "TrainConfig",
    "TrainTrace",
    "TrainingDivergenceError",
    "UnboundedBelowError",
    "best_jitter_level_analytic",
    "conjectured_robust_estimator",
    "draw_latents",
    "draw_sample_arrays",
    "dual_values_batch",
    "inner_max_dual",
    "jitter_level_for_eps",
    "jittering_denoiser_alpha",
    "jittering_risk_closed_form",
    "make_diagonal_operator",
    "make_subspace",
    "minimize_convex",
    "mmse_estimator",
    "optimal_jittering_estimator",
    "optimal_robust_alpha",
    "optimal_robust_denoiser",
    "pgd_attack",
    "pgd_perturb_batch",
    "read_factored_text",
    "residuals",
    "ridge_estimator",
    "rng_stream",
    "robust_risk_curve",
    "robust_risk_exact",
    "robust_risk_mode_form",
    "sample_pairs",
    "standard_risk_closed_form",
    "sweep_jitter_levels",
    "train",
    "worst_case_perturbation_projection",
    "write_factored_text",
    "write_matrix_csv",
]

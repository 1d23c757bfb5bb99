"""Reward learning and uncertainty quantification for pairwise preference
data with context-dependent annotator rationality."""

__version__ = "0.1.0"

from .bon import BonSelection, Candidate, Variant, pessimistic_reward, select, suboptimality
from .compare import TestOutcome, VarianceMode, Verdict, reward_diff_test, win_rate
from .errors import (
    DimensionMismatchError,
    FitDivergenceError,
    NumericalError,
    SingularInformationError,
    ValidationError,
)
from .inference import (
    ConfidenceInterval,
    InferenceArtifact,
    InfoMatrices,
    build_artifact,
    empirical_info,
    gamma_component_ci,
    normal_quantile,
    reward_ci,
    reward_point,
    schur_covariances,
)
from .model import (
    ModelParams,
    PreferenceDataset,
    PreferenceSample,
    QueryFeatures,
    grad_gamma,
    grad_theta,
    hessian_blocks,
    neg_log_likelihood,
    preference_prob,
    scale_value,
)
from .optim import FitConfig, FitResult, alternating_fit, loss_trace_monotone_check
from .simulate import (
    CoverageReport,
    DiagnosticsReport,
    ErrorCurve,
    RewardTarget,
    SimSpec,
    ThetaVectorTarget,
    answer_features,
    assumption_diagnostics,
    coverage_study,
    error_curves,
    generate,
)

__all__ = [
    "__version__",
    # model
    "PreferenceSample", "PreferenceDataset", "ModelParams", "QueryFeatures",
    "scale_value", "preference_prob", "neg_log_likelihood",
    "grad_theta", "grad_gamma", "hessian_blocks",
    # optimizer
    "FitConfig", "FitResult", "alternating_fit", "loss_trace_monotone_check",
    # inference
    "InfoMatrices", "InferenceArtifact", "ConfidenceInterval",
    "empirical_info", "schur_covariances", "build_artifact",
    "normal_quantile", "reward_point", "reward_ci", "gamma_component_ci",
    # comparison
    "Verdict", "VarianceMode", "TestOutcome", "reward_diff_test", "win_rate",
    # best-of-N
    "Variant", "Candidate", "BonSelection", "pessimistic_reward", "select", "suboptimality",
    # simulation
    "SimSpec", "ThetaVectorTarget", "RewardTarget", "CoverageReport", "ErrorCurve",
    "DiagnosticsReport", "answer_features", "generate", "coverage_study",
    "error_curves", "assumption_diagnostics",
    # errors
    "ValidationError", "DimensionMismatchError", "NumericalError",
    "FitDivergenceError", "SingularInformationError",
]

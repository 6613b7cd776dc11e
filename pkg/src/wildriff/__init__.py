"""wildriff: excess-risk upper bounds for black-box square-loss regressors
via interleaved subsampling without replacement and wild refitting.
"""

__version__ = "0.1.0"

from .core import (
    EvaluationConfig,
    PredictorHandle,
    RefitState,
    RegressionDataset,
    TrainerOracle,
    derive_rng,
    derive_seed,
    estimate_tau,
    warm_up,
)
from .metrics import OptimismPair, empirical_norm, ht_average, wild_optimism, wild_responses
from .refit import (
    RadiusEstimate,
    RiskBoundReport,
    WildRound,
    deviation_term,
    estimate_radius,
    evaluate,
    pilot_error_proxy,
    r_tilde,
    run_round,
    tune_noise_scale,
)
from .sampling import Subsample, membership_indicator, reservoir_sample, srswor, srswor_batch
from .synth import (
    ExperimentSpec,
    GroundTruth,
    empirical_excess_risk,
    generate,
    population_excess_risk,
)
from .theory import (
    FourierProfile,
    decay_constant,
    fourier_coefficients,
    norm_equivalence_check,
)
from .trainers import (
    FourierRidgeSpec,
    MlpSpec,
    TreeSpec,
    fourier_ridge_fit,
    fourier_ridge_trainer,
    make_trainer,
    mlp_fit,
    mlp_trainer,
    tree_fit,
    tree_trainer,
)

__all__ = [
    "__version__",
    "EvaluationConfig",
    "PredictorHandle",
    "RefitState",
    "RegressionDataset",
    "TrainerOracle",
    "derive_rng",
    "derive_seed",
    "estimate_tau",
    "warm_up",
    "OptimismPair",
    "empirical_norm",
    "ht_average",
    "wild_optimism",
    "wild_responses",
    "RadiusEstimate",
    "RiskBoundReport",
    "WildRound",
    "deviation_term",
    "estimate_radius",
    "evaluate",
    "pilot_error_proxy",
    "r_tilde",
    "run_round",
    "tune_noise_scale",
    "Subsample",
    "membership_indicator",
    "reservoir_sample",
    "srswor",
    "srswor_batch",
    "ExperimentSpec",
    "GroundTruth",
    "empirical_excess_risk",
    "generate",
    "population_excess_risk",
    "FourierProfile",
    "decay_constant",
    "fourier_coefficients",
    "norm_equivalence_check",
    "FourierRidgeSpec",
    "MlpSpec",
    "TreeSpec",
    "fourier_ridge_fit",
    "fourier_ridge_trainer",
    "make_trainer",
    "mlp_fit",
    "mlp_trainer",
    "tree_fit",
    "tree_trainer",
]

"""Learning to reject predictions whose explanations are low quality.

The package trains small predictors, attributes their predictions with
KernelSHAP, produces quality judgments (simulated against an oracle
predictor or aggregated from human annotations), trains a suite of
rejectors over the judged explanations, and benchmarks them with AUROC
and accepted/rejected set composition across rejection rates.
"""

__version__ = "0.1.0"

from .bench import (
    DEFAULT_GRIDS,
    DEFAULT_RATES,
    ExperimentConfig,
    ExperimentResult,
    ResultRecord,
    auroc,
    grid_search,
    paired_t_test,
    run_experiment,
    set_composition,
)
from .data import Dataset, Scaler, SplitIndices, SyntheticSpec, Task, load_csv, make_synthetic, split, standardize
from .explain import Explanation, ExplainerConfig, exact_shapley, kernel_shap, rerun_explanations
from .feedback import (
    AnnotationRecord,
    JudgedExplanation,
    JudgmentConfig,
    aggregate_annotations,
    pearson,
    simulate_judgment,
)
from .models import (
    BootstrapEnsemble,
    Predictor,
    PredictorKind,
    fit_bootstrap_ensemble,
    fit_predictor,
    predictive_variance,
)
from .quality import FaithfulnessConfig, complexity, faithfulness, stability
from .reject import (
    REJECTOR_KINDS,
    AugmentationConfig,
    Decision,
    MatchTrainLowQualityFraction,
    RejectionContext,
    Rejector,
    TargetRate,
    augment,
    calibrate_threshold,
    decide,
    make_rejector,
)
from .svm import KernelSVM, KernelSvmConfig

__all__ = [
    "__version__",
    "Dataset",
    "Scaler",
    "SplitIndices",
    "SyntheticSpec",
    "Task",
    "load_csv",
    "make_synthetic",
    "split",
    "standardize",
    "Predictor",
    "PredictorKind",
    "BootstrapEnsemble",
    "fit_predictor",
    "fit_bootstrap_ensemble",
    "predictive_variance",
    "Explanation",
    "ExplainerConfig",
    "kernel_shap",
    "exact_shapley",
    "rerun_explanations",
    "JudgedExplanation",
    "JudgmentConfig",
    "AnnotationRecord",
    "pearson",
    "simulate_judgment",
    "aggregate_annotations",
    "FaithfulnessConfig",
    "stability",
    "faithfulness",
    "complexity",
    "KernelSVM",
    "KernelSvmConfig",
    "AugmentationConfig",
    "RejectionContext",
    "Rejector",
    "REJECTOR_KINDS",
    "TargetRate",
    "MatchTrainLowQualityFraction",
    "Decision",
    "augment",
    "make_rejector",
    "calibrate_threshold",
    "decide",
    "ExperimentConfig",
    "ExperimentResult",
    "ResultRecord",
    "DEFAULT_GRIDS",
    "DEFAULT_RATES",
    "auroc",
    "set_composition",
    "grid_search",
    "run_experiment",
    "paired_t_test",
]

"""Non-contact breath-rate classification on simulated FMCW radar data.

The package covers the whole desk-scale pipeline: a physics-based IF-frame
simulator, slow-time phase extraction, dataset persistence/augmentation,
a from-scratch kernel SVM, and confusion-matrix scoring, all orchestrated
by the ``respira`` command-line interface.
"""

from .dataset import (
    ABNORMAL,
    NORMAL,
    UNLABELED,
    DatasetFormatError,
    DatasetSplit,
    PhaseRecord,
    Standardizer,
    augment_noise,
    load_csv,
    preprocess,
    save_csv,
    smote,
    split_records,
    standardize_apply,
    standardize_fit,
)
from .metrics import (
    ConfusionMatrix,
    UndefinedMetricError,
    accuracy,
    confusion,
    f1,
    precision,
    recall,
)
from .phase import (
    FILTERED,
    UNWRAPPED,
    WRAPPED,
    PhaseSeries,
    RangeProfiles,
    bandpass,
    classify_by_threshold,
    estimate_breaths,
    extract_phase,
    process_frame,
    range_profiles,
    select_bin,
    unwrap,
    wrap_phase,
)
from .radar import (
    SPEED_OF_LIGHT,
    BreathingScenario,
    ChirpParams,
    IFFrame,
    beat_frequency,
    chest_displacement,
    cohort_scenarios,
    default_radar_params,
    dump_frame_csv,
    range_resolution,
    simulate_cohort,
    simulate_frame,
    wavelength,
)
from .svm import (
    ConvergenceError,
    KernelSpec,
    KernelSvm,
    KktViolation,
    ModelFormatError,
    gram_matrix,
    kernel_eval,
    load_model,
    save_model,
)

__version__ = "0.1.0"

__all__ = [
    "ABNORMAL",
    "NORMAL",
    "UNLABELED",
    "SPEED_OF_LIGHT",
    "WRAPPED",
    "UNWRAPPED",
    "FILTERED",
    "BreathingScenario",
    "ChirpParams",
    "ConfusionMatrix",
    "ConvergenceError",
    "DatasetFormatError",
    "DatasetSplit",
    "IFFrame",
    "KernelSpec",
    "KernelSvm",
    "KktViolation",
    "ModelFormatError",
    "PhaseRecord",
    "PhaseSeries",
    "RangeProfiles",
    "Standardizer",
    "UndefinedMetricError",
    "accuracy",
    "augment_noise",
    "bandpass",
    "beat_frequency",
    "chest_displacement",
    "classify_by_threshold",
    "cohort_scenarios",
    "confusion",
    "default_radar_params",
    "dump_frame_csv",
    "estimate_breaths",
    "extract_phase",
    "f1",
    "gram_matrix",
    "kernel_eval",
    "load_csv",
    "load_model",
    "precision",
    "preprocess",
    "process_frame",
    "range_profiles",
    "range_resolution",
    "recall",
    "save_csv",
    "save_model",
    "select_bin",
    "simulate_cohort",
    "simulate_frame",
    "smote",
    "split_records",
    "standardize_apply",
    "standardize_fit",
    "unwrap",
    "wavelength",
    "wrap_phase",
]

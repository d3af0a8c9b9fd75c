"""Linearly activated recurrent networks: learning by linear solves, spectral size reduction."""

from .model import PrnnModel, StateSequence, TimeSeries, nrmse, step, trajectory
from .reservoir import ReservoirInit, init_reservoir, spectral_radius
from .learning import (
    LinearSolution,
    RegressionProblem,
    drive_reservoir,
    learn_full_transition,
    learn_output_weights,
    required_reservoir_size,
    solve_linear,
)
from .spectral import (
    CLUSTER_TOL,
    DEFECTIVE_COND,
    EigenDecomposition,
    JordanForm,
    RealJordanBlock,
    eigendecompose,
    evaluate_fractional,
    jordan_block_power,
    real_jordan,
    rebase_start,
)
from .reduction import (
    ComponentError,
    ReducedModel,
    component_errors,
    reduce_model,
    reduced_trajectory,
)
from .longterm import (
    UNIT_TOL,
    Behavior,
    EllipseAnalysis,
    analyze_longterm,
    classify_longterm,
    ellipse,
)
from .bench import (
    MSO_FREQUENCIES,
    BUILTIN_PUZZLES,
    BenchConfig,
    PuzzleReport,
    PuzzleSeries,
    TrialRecord,
    TrialReport,
    load_trajectory_csv,
    mso,
    predict_last,
    run_trials,
    sample_function,
    subsample,
    synthetic_trajectory,
)

__version__ = "0.1.0"

__all__ = [
    "PrnnModel",
    "StateSequence",
    "TimeSeries",
    "nrmse",
    "step",
    "trajectory",
    "ReservoirInit",
    "init_reservoir",
    "spectral_radius",
    "LinearSolution",
    "RegressionProblem",
    "drive_reservoir",
    "learn_full_transition",
    "learn_output_weights",
    "required_reservoir_size",
    "solve_linear",
    "CLUSTER_TOL",
    "DEFECTIVE_COND",
    "EigenDecomposition",
    "JordanForm",
    "RealJordanBlock",
    "eigendecompose",
    "evaluate_fractional",
    "jordan_block_power",
    "real_jordan",
    "rebase_start",
    "ComponentError",
    "ReducedModel",
    "component_errors",
    "reduce_model",
    "reduced_trajectory",
    "UNIT_TOL",
    "Behavior",
    "EllipseAnalysis",
    "analyze_longterm",
    "classify_longterm",
    "ellipse",
    "MSO_FREQUENCIES",
    "BUILTIN_PUZZLES",
    "BenchConfig",
    "PuzzleReport",
    "PuzzleSeries",
    "TrialRecord",
    "TrialReport",
    "load_trajectory_csv",
    "mso",
    "predict_last",
    "run_trials",
    "sample_function",
    "subsample",
    "synthetic_trajectory",
]

"""Quantum-inspired simultaneous proportional myoelectric control.

EMG feature windows are encoded as unit-norm amplitude states, per-DOF
measurement operator triples are learned from single-DOF training data,
and expectation values decode simultaneous proportional angle commands
for every degree of freedom at once.
"""

from .control import (
    DecodedAction,
    DecodeDiagnostics,
    DofDecision,
    decode,
    decode_dof,
    decode_features,
    expectation,
    residual_activations,
    rest_threshold_from_rest_windows,
)
from .datasets import (
    FeatureDataset,
    from_test_set,
    from_training_samples,
    load_feature_dataset,
    save_decode_csv,
    save_feature_dataset,
    to_blocks,
    to_training_samples,
)
from .errors import (
    ConfigurationError,
    DataError,
    DatasetParseError,
    DatasetSchemaError,
    DegenerateOperatorsError,
    DegeneratePrototypeError,
    DimensionError,
    EmptyInputError,
    InsufficientSamplesError,
    InsufficientTrainingError,
    MalformedBlockError,
    ModelError,
    QmyoError,
    UndefinedDenominatorError,
    ZeroSignalError,
)
from .evaluation import (
    Block,
    BlockErrorReport,
    TrajectoryPair,
    block_errors,
    r_squared_dof,
    r_squared_global,
)
from .experiment import (
    ExperimentConfig,
    ExperimentReport,
    SizeResult,
    evaluate_model,
    render_report_csv,
    render_report_text,
    report_for_model,
    run_experiment,
)
from .features import (
    EmgRecording,
    FeatureKind,
    FeatureVector,
    load_recording,
    mav,
    save_recording,
    segment_windows,
    slope_sign_changes,
    waveform_length,
    zero_crossings,
)
from .operators import (
    ControllerModel,
    DecodeConfig,
    Direction,
    Dof,
    DofOperators,
    MovementPhase,
    Operator,
    TrainingSample,
    build_completeness_operator,
    build_direction_operator,
    build_prototype,
    load_model,
    overlap_curve,
    save_model,
    train,
    with_decode_config,
)
from .state import QuantumState, encode, inner_product
from .synthetic import (
    MixingModel,
    ScenarioBlock,
    SyntheticScenario,
    TestSet,
    default_mixing_model,
    default_scenario,
    generate_features,
    generate_raw_emg,
    generate_test_scenario,
    generate_training_set,
    orthogonal_mixing_model,
)

__version__ = "0.1.0"

__all__ = [
    "Block",
    "BlockErrorReport",
    "ConfigurationError",
    "ControllerModel",
    "DataError",
    "DatasetParseError",
    "DatasetSchemaError",
    "DecodeConfig",
    "DecodeDiagnostics",
    "DecodedAction",
    "DegenerateOperatorsError",
    "DegeneratePrototypeError",
    "DimensionError",
    "Direction",
    "Dof",
    "DofDecision",
    "DofOperators",
    "EmgRecording",
    "EmptyInputError",
    "ExperimentConfig",
    "ExperimentReport",
    "FeatureDataset",
    "FeatureKind",
    "FeatureVector",
    "InsufficientSamplesError",
    "InsufficientTrainingError",
    "MalformedBlockError",
    "MixingModel",
    "ModelError",
    "MovementPhase",
    "Operator",
    "QmyoError",
    "QuantumState",
    "ScenarioBlock",
    "SizeResult",
    "SyntheticScenario",
    "TestSet",
    "TrainingSample",
    "TrajectoryPair",
    "UndefinedDenominatorError",
    "ZeroSignalError",
    "block_errors",
    "build_completeness_operator",
    "build_direction_operator",
    "build_prototype",
    "decode",
    "decode_dof",
    "decode_features",
    "default_mixing_model",
    "default_scenario",
    "encode",
    "evaluate_model",
    "expectation",
    "from_test_set",
    "from_training_samples",
    "generate_features",
    "generate_raw_emg",
    "generate_test_scenario",
    "generate_training_set",
    "inner_product",
    "load_feature_dataset",
    "load_model",
    "load_recording",
    "mav",
    "orthogonal_mixing_model",
    "overlap_curve",
    "r_squared_dof",
    "r_squared_global",
    "render_report_csv",
    "render_report_text",
    "report_for_model",
    "residual_activations",
    "rest_threshold_from_rest_windows",
    "run_experiment",
    "save_decode_csv",
    "save_feature_dataset",
    "save_model",
    "save_recording",
    "segment_windows",
    "slope_sign_changes",
    "to_blocks",
    "to_training_samples",
    "train",
    "waveform_length",
    "with_decode_config",
    "zero_crossings",
]

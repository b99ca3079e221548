"""Radar simulation of walking humans and micro-Doppler limb decomposition.

The package covers the full chain: an analytic (or mocap-driven) walking
model, ellipsoid scattering and FMCW frame synthesis, range-Doppler and
spectrogram processing, feature extraction with decision-tree limb
classification, and a streaming decomposer that tracks per-class
velocity envelopes in real time. The `mdl` console script drives the
same stages from INI scenario files.
"""

__version__ = "0.1.0"

from .body import (
    CLASS_ORDER,
    CLASS_REPORT_ORDER,
    SEGMENT_CLASS,
    SEGMENT_ORDER,
    EllipsoidShape,
    LimbClass,
    SegmentId,
    default_shapes,
)
from .config import ScenarioConfig, load_scenario
from .envelopes import (
    EnvelopeEmission,
    EnvelopeTrack,
    StreamingDecomposer,
    class_envelopes,
    decompose_stream,
    median_filter,
    read_envelopes_csv,
    write_envelopes_csv,
)
from .errors import ConfigurationError, DataContractError, MocapFormatError
from .features import (
    FeatureSample,
    extract_features,
    label_features,
    read_features_csv,
    split_dataset,
    write_features_csv,
)
from .gait import (
    GaitConfig,
    Trajectory,
    generate_gait,
    read_trajectory_csv,
    segment_velocity,
    write_trajectory_csv,
)
from .mocap import MocapRecording, load_mocap, mocap_to_trajectory
from .pipeline import (
    build_labeled_dataset,
    cmd_decompose,
    cmd_process,
    cmd_simulate,
    cmd_train_eval,
    run_all,
)
from .processing import (
    IntensityGrid,
    RangeDopplerMap,
    ThresholdMask,
    gamma_transform,
    normalize_to_unit,
    otsu_threshold,
    range_doppler_map,
    stft_spectrogram,
)
from .radar import (
    RADAR_PRESETS,
    SPEED_OF_LIGHT,
    ChirpFrame,
    RadarConfig,
    chirp_count_raw,
    chirp_duration,
    chirps_per_frame,
    load_frame,
    rcs_ellipsoid,
    save_frame,
    synth_frame,
    synth_frame_segments,
)
from .tree import (
    ConfusionMatrix,
    DecisionTree,
    evaluate_confusion,
    load_tree,
    save_tree,
    tree_train,
)

__all__ = [
    "CLASS_ORDER",
    "CLASS_REPORT_ORDER",
    "ChirpFrame",
    "ConfigurationError",
    "ConfusionMatrix",
    "DataContractError",
    "DecisionTree",
    "EllipsoidShape",
    "EnvelopeEmission",
    "EnvelopeTrack",
    "FeatureSample",
    "GaitConfig",
    "IntensityGrid",
    "LimbClass",
    "MocapFormatError",
    "MocapRecording",
    "RADAR_PRESETS",
    "RadarConfig",
    "RangeDopplerMap",
    "SEGMENT_CLASS",
    "SEGMENT_ORDER",
    "SPEED_OF_LIGHT",
    "ScenarioConfig",
    "SegmentId",
    "StreamingDecomposer",
    "ThresholdMask",
    "Trajectory",
    "build_labeled_dataset",
    "chirp_count_raw",
    "chirp_duration",
    "chirps_per_frame",
    "class_envelopes",
    "cmd_decompose",
    "cmd_process",
    "cmd_simulate",
    "cmd_train_eval",
    "decompose_stream",
    "default_shapes",
    "evaluate_confusion",
    "extract_features",
    "gamma_transform",
    "generate_gait",
    "label_features",
    "load_frame",
    "load_mocap",
    "load_scenario",
    "load_tree",
    "median_filter",
    "mocap_to_trajectory",
    "normalize_to_unit",
    "otsu_threshold",
    "range_doppler_map",
    "rcs_ellipsoid",
    "read_envelopes_csv",
    "read_features_csv",
    "read_trajectory_csv",
    "run_all",
    "save_frame",
    "save_tree",
    "segment_velocity",
    "split_dataset",
    "stft_spectrogram",
    "synth_frame",
    "synth_frame_segments",
    "tree_train",
    "write_envelopes_csv",
    "write_features_csv",
    "write_trajectory_csv",
]

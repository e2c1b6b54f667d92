"""motrack: motion-gated multi-object tracking with temporal memory,
tracking metrics, and a seeded occlusion-scenario simulator."""

from .association import (
    CONFIRMED,
    LOST,
    TENTATIVE,
    AssociationResult,
    DetectionCandidate,
    Match,
    Track,
    TrackerConfig,
    TrackerState,
    TrackOutput,
    associate_frame,
    candidate_affinity,
    cosine_affinity,
    fused_score,
    motion_consistency_score,
    step_tracker,
    temporal_buffer_update,
)
from .config import ConfigError, RunConfig
from .geometry import BoundingBox, center, iou
from .kinematics import (
    KalmanTrackState,
    KinematicsConfig,
    kf_gated_update,
    kf_init,
    kf_predict,
)
from .metrics import (
    EvalReport,
    TrajectorySet,
    clear_metrics,
    evaluate,
    hota,
    identity_metrics,
)
from .simulator import ScenarioConfig, generate, scenario_by_name, standard_suite
from .temporal_memory import (
    GateNetwork,
    LatentMap,
    MotionQueue,
    ProjectionPair,
    attention_scores,
    constant_velocity_forecast,
    forecast,
    gated_fuse,
    memory_cache_select,
    spatial_pool,
)

__version__ = "0.1.0"

__all__ = [
    "AssociationResult",
    "BoundingBox",
    "CONFIRMED",
    "ConfigError",
    "DetectionCandidate",
    "EvalReport",
    "GateNetwork",
    "KalmanTrackState",
    "KinematicsConfig",
    "LatentMap",
    "LOST",
    "Match",
    "MotionQueue",
    "ProjectionPair",
    "RunConfig",
    "ScenarioConfig",
    "TENTATIVE",
    "Track",
    "TrackOutput",
    "TrackerConfig",
    "TrackerState",
    "TrajectorySet",
    "associate_frame",
    "attention_scores",
    "candidate_affinity",
    "center",
    "clear_metrics",
    "constant_velocity_forecast",
    "cosine_affinity",
    "evaluate",
    "forecast",
    "fused_score",
    "gated_fuse",
    "generate",
    "hota",
    "identity_metrics",
    "iou",
    "kf_gated_update",
    "kf_init",
    "kf_predict",
    "memory_cache_select",
    "motion_consistency_score",
    "scenario_by_name",
    "spatial_pool",
    "standard_suite",
    "step_tracker",
    "temporal_buffer_update",
]

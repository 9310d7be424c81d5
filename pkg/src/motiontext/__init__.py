"""motiontext: rule-based natural-language captioning of 3D human motion.

The pipeline turns a joint-trajectory sequence into a caption in five
stages: per-frame posecode classification, motioncode segmentation over the
categorical timelines, salience selection, rule-based aggregation, and
template rendering with subject selection and pose injection. Everything is
deterministic under a fixed seed.
"""

from .aggregate import (AggregatedMotion, SalienceStats, aggregate_all, assign_bins,
                        order_timecodes, select_motioncodes)
from .motion_io import (MotionFileError, MotionSequence, mirror_sequence,
                        normalize_sequence, parse_motion_file, sequence_to_csv,
                        sequence_to_json)
from .motioncodes import (Motioncode, MotioncodeConfig, MotionSegment,
                          build_motioncodes, compute_spatial_attribute,
                          compute_velocity_attribute, detect_motion_segments)
from .pipeline import (ConfigError, PipelineConfig, caption_sequence, dump_to_json,
                       run_pipeline)
from .posecodes import (NoiseConfig, PosecodeInstance, PosecodeKind, PosecodeTimeline,
                        Thresholds, default_instances, extract_posecode_timelines)
from .skeleton import DEFAULT_SKELETON, JOINT_NAMES, T_POSE, SkeletonSpec
from .textgen import (CaptionDocument, SubjectChoice, TemplateLibrary,
                      choose_pose_injection, greedy_weighted_cover, render_caption,
                      select_subject)

__version__ = "0.1.0"

__all__ = [
    "AggregatedMotion", "CaptionDocument", "ConfigError", "DEFAULT_SKELETON",
    "JOINT_NAMES", "Motioncode", "MotioncodeConfig", "MotionFileError",
    "MotionSegment", "MotionSequence", "NoiseConfig", "PipelineConfig",
    "PosecodeInstance", "PosecodeKind", "PosecodeTimeline", "SalienceStats",
    "SkeletonSpec", "SubjectChoice", "T_POSE", "TemplateLibrary", "Thresholds",
    "aggregate_all", "assign_bins", "build_motioncodes", "caption_sequence",
    "choose_pose_injection", "compute_spatial_attribute", "compute_velocity_attribute",
    "default_instances", "detect_motion_segments", "dump_to_json",
    "extract_posecode_timelines", "greedy_weighted_cover", "mirror_sequence",
    "normalize_sequence", "order_timecodes", "parse_motion_file", "render_caption",
    "run_pipeline", "select_motioncodes", "select_subject", "sequence_to_csv",
    "sequence_to_json",
]

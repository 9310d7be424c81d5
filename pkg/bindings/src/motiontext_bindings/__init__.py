"""In-process captioning of in-memory joint arrays.

Wraps the motiontext pipeline for dataset-augmentation loops that already
hold trajectories as numeric buffers: no files, no subprocesses. Captions are
byte-identical to what the CLI writes for the same data, seed, and config
(the wrapper drives the same per-(input, caption) seed derivation).

Float64 C-contiguous buffers are used without copying; anything else is
validated into one converted copy.
"""

from dataclasses import dataclass, field

import numpy as np

from motiontext.motion_io import MotionSequence
from motiontext.pipeline import PipelineConfig, caption_sequence, dump_to_json

__version__ = "0.1.0"

__all__ = ["ArrayMotionView", "caption_array", "load_config", "__version__"]


def load_config(path=None, **overrides):
    """Pipeline configuration: packaged defaults or a JSON file, plus overrides."""
    if path is None:
        return PipelineConfig.defaults(**overrides)
    return PipelineConfig.from_file(path, **overrides)


@dataclass(frozen=True)
class ArrayMotionView:
    """One motion take held in memory: an (F, 22, 3) buffer plus run settings."""

    frames: np.ndarray
    fps: float
    seed: int = 0
    config: PipelineConfig = None
    overrides: dict = field(default_factory=dict)
    emit_intermediate: bool = False

    def resolved_config(self):
        config = self.config if self.config is not None else load_config()
        if self.overrides:
            config = PipelineConfig.from_dict(
                {**{k: getattr(config, k) for k in PipelineConfig.__dataclass_fields__},
                 **self.overrides})
        return config


def caption_array(view, input_index=0, caption_index=0):
    """Caption one in-memory take; returns (text, intermediate dump or None).

    Shape and value problems raise ValueError with the core validation
    message. The result for (frames, fps, seed, config) matches the CLI's
    output file for the same input byte for byte.
    """
    frames = np.asarray(view.frames, dtype=np.float64)
    if frames.ndim != 3 or frames.shape[1:] != (22, 3):
        raise ValueError(f"frames must have shape (F, 22, 3), got {frames.shape}")
    seq = MotionSequence(fps=float(view.fps), frames=frames)
    config = view.resolved_config()
    document = caption_sequence(seq, config, view.seed, input_index, caption_index)
    blob = dump_to_json(document) if view.emit_intermediate else None
    return document.text, blob

"""Detecting movements in categorical timelines.

Runs the segmentation machinery directly on hand-written ordinal sequences
so the rules are easy to see: flicker shorter than the hysteresis window is
ignored, same-direction transitions merge, a long stationary gap or a
direction flip closes the segment. Then does the same on a real synthetic
motion and prints the resulting motioncodes with their attributes.
"""

import numpy as np

from motiontext import JOINT_NAMES, MotionSequence, T_POSE, normalize_sequence
from motiontext.motioncodes import (MotioncodeConfig, build_motioncodes,
                                    compute_spatial_attribute, detect_motion_segments)
from motiontext.posecodes import (ANGLE_CATEGORIES, NO_NOISE, PosecodeInstance,
                                  PosecodeKind, PosecodeTimeline,
                                  extract_posecode_timelines)


def timeline_of(ordinals):
    inst = PosecodeInstance(kind=PosecodeKind("angle"),
                            joints=("left_shoulder", "left_elbow", "left_wrist"), index=0)
    return PosecodeTimeline(instance=inst, categories=np.asarray(ordinals),
                            category_names=ANGLE_CATEGORIES, ranks=tuple(range(6)))


cases = {
    "clean staircase": [0, 0, 1, 1, 2, 2],
    "flicker (suppressed)": [0, 1, 0, 1, 0],
    "up then down": [0, 0, 2, 2, 0, 0],
    "long pause splits": [0, 0] + [1] * 12 + [2, 2],
}
for name, ordinals in cases.items():
    segments = detect_motion_segments(timeline_of(ordinals), max_range=5,
                                      min_run=2, min_transitions=1)
    desc = [f"[{s.T_s},{s.T_e}] dir {s.direction:+d} M_S {compute_spatial_attribute(s):+d}"
            for s in segments]
    print(f"{name:24s} {ordinals}\n{'':24s} -> {desc or 'no motion'}")

# --- on an actual motion ------------------------------------------------------
frames = np.tile(np.array([T_POSE[j] for j in JOINT_NAMES]), (80, 1, 1))
lw = JOINT_NAMES.index("left_wrist")
for t in range(80):
    frames[t, lw] += np.array([0.008, 0.0, 0.0]) * min(t, 50)   # drift to the body's left
seq = normalize_sequence(MotionSequence(fps=20.0, frames=frames))

timelines = extract_posecode_timelines(
    seq, [PosecodeInstance(kind=PosecodeKind.parse("position:X:global"),
                           joints=("left_wrist",), index=0)], NO_NOISE)
print("\nleft wrist drifting leftward:")
for code in build_motioncodes(timelines, seq, MotioncodeConfig()):
    rate = code.M_V * seq.fps
    print(f"  {code.family}: {code.direction_label}, |M_S|={abs(code.M_S)} "
          f"({code.intensity_class}), M_V={code.M_V:.3f}/frame "
          f"({rate:.2f}/s -> {code.velocity_class}), frames {code.T_s}-{code.T_e}")

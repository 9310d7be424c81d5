"""Motion files in, canonical reference frame out.

Builds the documented two-frame T-pose example file, parses it back, then
shows that normalization is idempotent and cancels any starting position or
heading: the same clip recorded facing any direction normalizes to the same
coordinates.
"""

import json
from pathlib import Path

import numpy as np

from motiontext import (JOINT_NAMES, T_POSE, normalize_sequence, parse_motion_file,
                        sequence_to_json)
from motiontext.motion_io import MotionSequence

HERE = Path(__file__).parent

# --- write and re-read the documented T-pose example -------------------------
tpose = np.array([T_POSE[j] for j in JOINT_NAMES])
doc = {
    "fps": 20.0,
    "joints": list(JOINT_NAMES),
    "frames": [tpose.tolist(), tpose.tolist()],
}
sample = HERE / "data" / "tpose.json"
sample.parent.mkdir(exist_ok=True)
sample.write_text(json.dumps(doc, indent=1), encoding="utf-8")

seq = parse_motion_file(sample.read_bytes(), "canonical-json")
print(f"parsed {sample.name}: {seq.n_frames} frames at {seq.fps} fps")
print(f"left wrist at {seq.joint('left_wrist')[0]}")

# --- normalization is idempotent ---------------------------------------------
normalized = normalize_sequence(seq)
again = normalize_sequence(normalized)
print(f"normalize twice is the same object: {again is normalized}")

# --- heading and position do not matter --------------------------------------
theta = np.radians(125.0)
c, s = np.cos(theta), np.sin(theta)
rot = np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]])
moved = MotionSequence(fps=20.0, frames=seq.frames @ rot.T + np.array([4.0, 0.0, -7.0]))
recovered = normalize_sequence(moved)
err = np.max(np.abs(recovered.frames - normalized.frames))
print(f"rotated 125 deg + shifted (4, 0, -7): recovered within {err:.2e} m")

# round-trip through text for good measure
back = parse_motion_file(sequence_to_json(recovered), "canonical-json")
print(f"json round-trip exact: {np.array_equal(back.frames, recovered.frames)}")

"""Motion sequence parsing, validation, and reference-frame normalization.

Two text formats are supported:

* canonical-json: an object with fields ``fps`` (number), ``joints`` (array of
  the 22 canonical names, in order), ``frames`` (array of F arrays of 22
  ``[x, y, z]`` triples, meters), and optional ``unit_scale`` (default 1.0)
  applied to every coordinate.
* flat-csv: header row ``frame,joint,x,y,z`` followed by one row per
  (frame, joint), sorted by frame then canonical joint order. The format
  carries no frame rate, so the parser takes one as an argument.

Normalization places the frame-0 root at the origin of the ground plane
(x = z = 0, height preserved) and rotates the whole sequence about the y-axis
so the frame-0 hip line is perpendicular to +z with the body facing +z. The
facing direction is the hip line crossed with the vertical axis.
"""

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .skeleton import DEFAULT_SKELETON, JOINT_NAMES


class MotionFileError(ValueError):
    """Malformed or invalid motion file; message carries the location."""


@dataclass(frozen=True)
class MotionSequence:
    """Per-frame 3D joint positions (F x 22 x 3, meters) plus frame rate."""

    fps: float
    frames: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float64)
        object.__setattr__(self, "frames", frames)
        if frames.ndim != 3 or frames.shape[1] != 22 or frames.shape[2] != 3:
            raise MotionFileError(f"frames must have shape (F, 22, 3), got {frames.shape}")
        if frames.shape[0] < 2:
            raise MotionFileError(f"sequence must have at least 2 frames, got {frames.shape[0]}")
        if not math.isfinite(self.fps) or self.fps <= 0:
            raise MotionFileError("fps must be positive")
        if not np.isfinite(frames).all():
            bad = np.argwhere(~np.isfinite(frames))[0]
            raise MotionFileError(
                f"non-finite coordinate at frame {bad[0]}, joint '{JOINT_NAMES[bad[1]]}', axis {'xyz'[bad[2]]}"
            )

    @property
    def n_frames(self):
        return self.frames.shape[0]

    @property
    def duration(self):
        return self.n_frames / self.fps

    def joint(self, name):
        """Trajectory of one joint, shape (F, 3)."""
        return self.frames[:, JOINT_NAMES.index(name), :]


def _check_joint_names(names):
    if len(names) != 22:
        raise MotionFileError(f"joint count {len(names)} ≠ 22")
    if tuple(names) != JOINT_NAMES:
        for i, (got, want) in enumerate(zip(names, JOINT_NAMES)):
            if got != want:
                raise MotionFileError(f"joint {i} is '{got}', expected '{want}' (canonical order required)")


def parse_motion_file(data, format="canonical-json", fps=20.0):
    """Parse raw motion-file content into an un-normalized MotionSequence.

    Args:
        data: file content, bytes or str.
        format: "canonical-json" or "flat-csv".
        fps: frame rate to assume for flat-csv input (the format has no
            fps field); ignored for canonical-json.

    Raises:
        MotionFileError: malformed syntax, wrong joint count, non-finite
            values, or non-positive fps, with the offending location.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    if format == "canonical-json":
        return _parse_canonical_json(data)
    if format == "flat-csv":
        return _parse_flat_csv(data, fps)
    raise MotionFileError(f"unknown format '{format}'")


def _parse_canonical_json(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MotionFileError(f"malformed JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise MotionFileError("top-level value must be an object")
    for key in ("fps", "joints", "frames"):
        if key not in doc:
            raise MotionFileError(f"missing field '{key}'")
    fps = doc["fps"]
    if not isinstance(fps, (int, float)) or isinstance(fps, bool) or not math.isfinite(fps) or fps <= 0:
        raise MotionFileError("fps must be positive")
    _check_joint_names(list(doc["joints"]))
    scale = doc.get("unit_scale", 1.0)
    if not isinstance(scale, (int, float)) or not math.isfinite(scale) or scale <= 0:
        raise MotionFileError("unit_scale must be a positive number")
    rows = doc["frames"]
    if not isinstance(rows, list) or len(rows) < 2:
        raise MotionFileError(f"sequence must have at least 2 frames, got {len(rows) if isinstance(rows, list) else 0}")
    for f, frame in enumerate(rows):
        if len(frame) != 22:
            raise MotionFileError(f"frame {f}: joint count {len(frame)} ≠ 22")
        for j, triple in enumerate(frame):
            if len(triple) != 3:
                raise MotionFileError(f"frame {f}, joint '{JOINT_NAMES[j]}': expected [x, y, z]")
    frames = np.asarray(rows, dtype=np.float64) * float(scale)
    return MotionSequence(fps=float(fps), frames=frames)


def _parse_flat_csv(text, fps):
    if not math.isfinite(fps) or fps <= 0:
        raise MotionFileError("fps must be positive")
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise MotionFileError("empty csv file") from None
    if [h.strip() for h in header] != ["frame", "joint", "x", "y", "z"]:
        raise MotionFileError(f"bad csv header {header!r}, expected frame,joint,x,y,z")
    rows = [r for r in reader if r]
    if len(rows) % 22 != 0:
        raise MotionFileError(f"row count {len(rows)} is not a multiple of 22 joints")
    n_frames = len(rows) // 22
    frames = np.empty((n_frames, 22, 3), dtype=np.float64)
    for f in range(n_frames):
        for j in range(22):
            row = rows[f * 22 + j]
            line = f * 22 + j + 2  # 1-based, after header
            if len(row) != 5:
                raise MotionFileError(f"line {line}: expected 5 fields, got {len(row)}")
            if row[0].strip() != str(f):
                raise MotionFileError(f"line {line}: frame index '{row[0]}' out of order, expected {f}")
            if row[1].strip() != JOINT_NAMES[j]:
                raise MotionFileError(f"line {line}: joint '{row[1]}' out of order, expected '{JOINT_NAMES[j]}'")
            try:
                frames[f, j] = [float(row[2]), float(row[3]), float(row[4])]
            except ValueError:
                raise MotionFileError(f"line {line}: non-numeric coordinate") from None
    return MotionSequence(fps=float(fps), frames=frames)


def sequence_to_json(seq, unit_scale=None):
    """Serialize a MotionSequence as canonical-json text (round-trips parse)."""
    doc = {
        "fps": seq.fps,
        "joints": list(JOINT_NAMES),
        "frames": seq.frames.tolist(),
    }
    if unit_scale is not None:
        doc["unit_scale"] = unit_scale
        doc["frames"] = (seq.frames / unit_scale).tolist()
    return json.dumps(doc)


def sequence_to_csv(seq):
    """Serialize a MotionSequence as flat-csv text."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["frame", "joint", "x", "y", "z"])
    for f in range(seq.n_frames):
        for j, name in enumerate(JOINT_NAMES):
            x, y, z = seq.frames[f, j]
            writer.writerow([f, name, repr(float(x)), repr(float(y)), repr(float(z))])
    return out.getvalue()


def _yaw_rotation(angle):
    """Rotation matrix about the y-axis by `angle` radians."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def normalize_sequence(seq, skeleton=DEFAULT_SKELETON):
    """Rigidly move a sequence into the canonical frame-0 reference frame.

    The frame-0 root is translated to x = z = 0 (height preserved) and the
    whole sequence is rotated about the y-axis so that frame 0 faces +z.
    Already-normalized sequences are returned unchanged, so the operation is
    idempotent bit for bit.
    """
    if seq.normalized:
        return seq
    root0 = seq.frames[0, skeleton.index("pelvis")]
    shift = np.array([root0[0], 0.0, root0[2]])
    frames = seq.frames - shift

    hip = frames[0, skeleton.index("left_hip")] - frames[0, skeleton.index("right_hip")]
    hip_xz = np.array([hip[0], 0.0, hip[2]])
    norm = np.linalg.norm(hip_xz)
    if norm < 1e-9:
        warnings.warn("frame-0 hips coincide in the ground plane; keeping original facing direction")
        return MotionSequence(fps=seq.fps, frames=frames, normalized=True)
    facing = np.cross(hip_xz / norm, np.array([0.0, 1.0, 0.0]))
    theta = math.atan2(facing[0], facing[2])
    rot = _yaw_rotation(-theta)
    frames = frames @ rot.T
    return MotionSequence(fps=seq.fps, frames=frames, normalized=True)


def mirror_sequence(seq, skeleton=DEFAULT_SKELETON):
    """Reflect a normalized sequence across the body's sagittal plane.

    Negates x and swaps every left/right joint channel, so the mirrored left
    wrist follows the original right wrist's (reflected) path. Involution:
    mirror(mirror(s)) == s exactly.
    """
    if not seq.normalized:
        raise ValueError("mirror_sequence requires a normalized sequence")
    frames = seq.frames[:, skeleton.mirror_index_perm(), :].copy()
    frames[:, :, 0] = -frames[:, :, 0]
    return MotionSequence(fps=seq.fps, frames=frames, normalized=True)

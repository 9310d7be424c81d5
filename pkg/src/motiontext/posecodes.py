"""Per-frame categorical posecodes over joint geometry.

A posecode instance pairs a measurement kind (angle, distance, relative
position, pitch/roll, ground contact, root orientation, position) with a
concrete joint set. Extraction turns a normalized sequence into one
categorical timeline per instance. Category ordinals are ordered along the
measured scalar so that motion detection can count ordinal transitions;
categories with no place on that scale (the various "ignored" states) carry
a rank of None and are transparent to transition counting.

Subjectivity noise is zero-mean Gaussian, added to the measured scalar
before thresholding. Draws come from a counter-based generator keyed by
(seed, instance index) with the in-stream position equal to the frame
index, so timelines are identical regardless of evaluation order.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation

from .skeleton import DEFAULT_SKELETON, JOINT_NAMES

_MASK64 = (1 << 64) - 1


################################################################################
## KINDS AND CATEGORY TABLES
################################################################################

@dataclass(frozen=True)
class PosecodeKind:
    name: str
    axis: str = None          # "X" | "Y" | "Z" where applicable
    reference: str = None     # "root-relative" | "global" for position

    def __post_init__(self):
        if self.axis is not None and self.axis not in ("X", "Y", "Z"):
            raise ValueError(f"axis must be X, Y or Z, got {self.axis!r}")

    def __str__(self):
        parts = [self.name]
        if self.axis:
            parts.append(self.axis)
        if self.reference:
            parts.append(self.reference)
        return ":".join(parts)

    @staticmethod
    def parse(text):
        parts = text.split(":")
        name = parts[0]
        axis = parts[1] if len(parts) > 1 else None
        reference = parts[2] if len(parts) > 2 else None
        return PosecodeKind(name, axis, reference)


ANGLE = "angle"
DISTANCE = "distance"
RELATIVE_POSITION = "relative-position"
PITCH_ROLL = "pitch-roll"
GROUND_CONTACT = "ground-contact"
ORIENTATION = "orientation"
POSITION = "position"

IGNORED = "ignored"

# Ordinal 0 = straight; ordinals grow with flexion (decreasing interior angle).
ANGLE_CATEGORIES = (
    "straight",
    "slightly bent",
    "partially bent",
    "bent at a right angle",
    "almost completely bent",
    "completely bent",
)
DISTANCE_CATEGORIES = ("close", "shoulder width", "spread", "wide apart")
RELPOS_CATEGORIES = {
    "X": ("right of", IGNORED, "left of"),
    "Y": ("below", IGNORED, "above"),
    "Z": ("behind", IGNORED, "in front of"),
}
PITCH_ROLL_CATEGORIES = ("vertical", IGNORED, "horizontal")
GROUND_CATEGORIES = ("on the ground", "ground-ignored")


@dataclass(frozen=True)
class Thresholds:
    """Numeric bin edges for every posecode family."""

    # interior angle, degrees; ascending edges between the six categories,
    # listed from the "completely bent" end: ordinal = 5 - digitize(deg)
    angle_edges_deg: tuple = (45.0, 75.0, 105.0, 135.0, 160.0)
    # pairwise distance as a multiple of the frame-0 shoulder width
    distance_edges_ratio: tuple = (0.5, 1.5, 2.5)
    relpos_ignore_band_m: float = 0.05
    pitch_roll_vertical_max_deg: float = 25.0
    pitch_roll_horizontal_min_deg: float = 65.0
    ground_contact_eps_m: float = 0.05
    orientation_sector_deg: float = 45.0
    position_step_m: float = 0.15
    position_max_bin: int = 5

    def validate(self):
        if list(self.angle_edges_deg) != sorted(self.angle_edges_deg) or len(self.angle_edges_deg) != 5:
            raise ValueError("angle_edges_deg must be 5 ascending values")
        if list(self.distance_edges_ratio) != sorted(self.distance_edges_ratio) or len(self.distance_edges_ratio) != 3:
            raise ValueError("distance_edges_ratio must be 3 ascending values")
        for name in ("relpos_ignore_band_m", "ground_contact_eps_m", "orientation_sector_deg", "position_step_m"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.pitch_roll_vertical_max_deg < self.pitch_roll_horizontal_min_deg < 90:
            raise ValueError("pitch/roll cones must satisfy 0 < vertical < horizontal < 90")
        if self.position_max_bin < 1:
            raise ValueError("position_max_bin must be >= 1")
        return self


DEFAULT_THRESHOLDS = Thresholds()


@dataclass(frozen=True)
class NoiseConfig:
    """Seeded subjectivity noise for posecode measurements."""

    angle_sigma: float = 2.0      # degrees
    distance_sigma: float = 0.01  # meters
    seed: int = 0
    enabled: bool = True

    def __post_init__(self):
        if self.angle_sigma < 0 or self.distance_sigma < 0:
            raise ValueError("noise sigmas must be >= 0")

    def offsets(self, instance_index, n, sigma):
        """One draw per frame for an instance; keyed, order-independent."""
        if not self.enabled or sigma == 0.0:
            return np.zeros(n)
        bits = np.random.Philox(key=[self.seed & _MASK64, instance_index & _MASK64])
        return sigma * np.random.Generator(bits).standard_normal(n)

    def offset(self, instance_index, frame_index, sigma):
        if not self.enabled or sigma == 0.0:
            return 0.0
        return float(self.offsets(instance_index, frame_index + 1, sigma)[frame_index])


NO_NOISE = NoiseConfig(enabled=False)


################################################################################
## INSTANCES AND TIMELINES
################################################################################

_ARITY = {ANGLE: 3, DISTANCE: 2, RELATIVE_POSITION: 2, PITCH_ROLL: 2,
          GROUND_CONTACT: 1, ORIENTATION: 1, POSITION: 1}


@dataclass(frozen=True)
class PosecodeInstance:
    """One measurement kind applied to a concrete joint set.

    Angle joints are (endpoint, vertex, endpoint); pitch/roll joints are
    (top, bottom) of the body segment named by `label`; orientation and
    position take a single joint.
    """

    kind: PosecodeKind
    joints: tuple
    label: str = None
    index: int = -1

    def __post_init__(self):
        object.__setattr__(self, "joints", tuple(self.joints))
        expected = _ARITY[self.kind.name]
        if len(self.joints) != expected:
            raise ValueError(f"{self.kind} takes {expected} joints, got {len(self.joints)}")
        unknown = set(self.joints) - set(JOINT_NAMES)
        if unknown:
            raise ValueError(f"unknown joints: {sorted(unknown)}")
        if self.kind.name in (RELATIVE_POSITION, ORIENTATION, POSITION) and self.kind.axis is None:
            raise ValueError(f"{self.kind.name} requires an axis")
        if self.kind.name == POSITION and self.kind.reference not in ("root-relative", "global"):
            raise ValueError("position requires reference root-relative or global")

    @property
    def subject_joints(self):
        """Joints this instance describes (the angle vertex, both of a pair, ...)."""
        if self.kind.name == ANGLE:
            return (self.joints[1],)
        if self.kind.name in (DISTANCE, RELATIVE_POSITION):
            return self.joints
        if self.kind.name == PITCH_ROLL:
            return self.joints
        return (self.joints[0],)

    def spec(self):
        d = {"kind": str(self.kind), "joints": list(self.joints)}
        if self.label:
            d["label"] = self.label
        return d


@dataclass(frozen=True)
class PosecodeTimeline:
    """Length-F categorical trajectory of one posecode instance."""

    instance: PosecodeInstance
    categories: np.ndarray          # int ordinals into category_names
    category_names: tuple
    ranks: tuple                    # per ordinal: position on the counting scale, or None

    def __post_init__(self):
        cats = np.asarray(self.categories, dtype=np.int64)
        object.__setattr__(self, "categories", cats)
        if cats.min(initial=0) < 0 or cats.max(initial=0) >= len(self.category_names):
            raise ValueError("category ordinal out of label range")
        if len(self.ranks) != len(self.category_names):
            raise ValueError("ranks and category_names must align")

    @property
    def n_frames(self):
        return len(self.categories)


################################################################################
## MEASUREMENTS
################################################################################

def measure_angle(frame, triple, skeleton=DEFAULT_SKELETON):
    """Interior angle in degrees at `triple[1]` between rays to the endpoints.

    Returns NaN when a ray has zero length (coincident joints); callers map
    that to the ignored category.
    """
    a, vertex, b = (np.asarray(frame[skeleton.index(j)], dtype=float) for j in triple)
    return float(_angle_deg(a[None] - vertex[None], b[None] - vertex[None])[0])


def _angle_deg(u, v):
    nu = np.linalg.norm(u, axis=-1)
    nv = np.linalg.norm(v, axis=-1)
    bad = (nu < 1e-9) | (nv < 1e-9)
    nu = np.where(bad, 1.0, nu)
    nv = np.where(bad, 1.0, nv)
    cos = np.clip(np.einsum("...i,...i->...", u, v) / (nu * nv), -1.0, 1.0)
    out = np.degrees(np.arccos(cos))
    return np.where(bad, np.nan, out)


def _incline_from_vertical_deg(direction):
    """Angle (0-90 degrees) between a body-segment line and the y-axis."""
    norm = np.linalg.norm(direction, axis=-1)
    bad = norm < 1e-9
    cos = np.abs(direction[..., 1]) / np.where(bad, 1.0, norm)
    out = np.degrees(np.arccos(np.clip(cos, -1.0, 1.0)))
    return np.where(bad, np.nan, out)


def root_rotations(frames, skeleton=DEFAULT_SKELETON):
    """Per-frame orthonormal root basis estimated from hips and lower spine."""
    lhip = frames[:, skeleton.index("left_hip")]
    rhip = frames[:, skeleton.index("right_hip")]
    pelvis = frames[:, skeleton.index("pelvis")]
    spine = frames[:, skeleton.index("spine1")]
    x = lhip - rhip
    up = spine - pelvis
    out = np.tile(np.eye(3), (len(frames), 1, 1))
    nx = np.linalg.norm(x, axis=1)
    ok = nx > 1e-9
    x = np.where(ok[:, None], x / np.where(ok, nx, 1.0)[:, None], x)
    z = np.cross(x, up)
    nz = np.linalg.norm(z, axis=1)
    ok &= nz > 1e-9
    z = np.where(ok[:, None], z / np.where(nz > 1e-9, nz, 1.0)[:, None], z)
    y = np.cross(z, x)
    out[ok, :, 0] = x[ok]
    out[ok, :, 1] = y[ok]
    out[ok, :, 2] = z[ok]
    return out


def relative_root_euler(frames, skeleton=DEFAULT_SKELETON):
    """Rotation of each frame's root relative to frame 0 as (yaw, pitch, roll).

    Intrinsic Y-X-Z decomposition, degrees. Yaw is positive for a
    counter-clockwise turn seen from above.
    """
    bases = root_rotations(frames, skeleton)
    rel = bases @ bases[0].T
    yxz = Rotation.from_matrix(rel).as_euler("YXZ", degrees=True)
    return yxz  # columns: yaw (Y), pitch (X), roll (Z)


################################################################################
## CLASSIFIERS
################################################################################

def classify_angle(deg, noise=None, instance_index=0, frame_index=0, thresholds=DEFAULT_THRESHOLDS):
    """Bin an interior angle into the six bend categories (0 = straight)."""
    if noise is not None:
        deg = deg + noise.offset(instance_index, frame_index, noise.angle_sigma)
    return int(_classify_angle_array(np.atleast_1d(float(deg)), thresholds)[0])


def _classify_angle_array(deg, thresholds):
    deg = np.clip(deg, 0.0, 180.0)
    return len(thresholds.angle_edges_deg) - np.digitize(deg, thresholds.angle_edges_deg)


def classify_distance(dist, shoulder_width, noise=None, instance_index=0, frame_index=0,
                      thresholds=DEFAULT_THRESHOLDS):
    """Bin an L2 distance, expressed in shoulder widths, into four categories."""
    if shoulder_width <= 0:
        raise ValueError("shoulder_width must be positive")
    if noise is not None:
        dist = dist + noise.offset(instance_index, frame_index, noise.distance_sigma)
    return int(_classify_distance_array(np.atleast_1d(float(dist)), shoulder_width, thresholds)[0])


def _classify_distance_array(dist, shoulder_width, thresholds):
    ratio = np.maximum(dist, 0.0) / shoulder_width
    return np.digitize(ratio, thresholds.distance_edges_ratio)


def classify_relative_position(pa, pb, axis, noise=None, instance_index=0, frame_index=0,
                               thresholds=DEFAULT_THRESHOLDS):
    """Classify the signed per-axis offset of `pa` relative to `pb`.

    Positive x difference means `pa` is on the body's left of `pb`; offsets
    inside the ignore band are the middle (ignored) category.
    """
    delta = float(np.asarray(pa)["XYZ".index(axis)] - np.asarray(pb)["XYZ".index(axis)])
    if noise is not None:
        delta = delta + noise.offset(instance_index, frame_index, noise.distance_sigma)
    return int(_classify_relpos_array(np.atleast_1d(delta), thresholds)[0])


def _classify_relpos_array(delta, thresholds):
    band = thresholds.relpos_ignore_band_m
    return np.where(delta < -band, 0, np.where(delta > band, 2, 1))


def classify_pitch_roll(top, bottom, noise=None, instance_index=0, frame_index=0,
                        thresholds=DEFAULT_THRESHOLDS):
    """Classify a body segment as vertical, horizontal, or in-between."""
    incline = _incline_from_vertical_deg(np.asarray(top, dtype=float) - np.asarray(bottom, dtype=float))
    if noise is not None:
        incline = incline + noise.offset(instance_index, frame_index, noise.angle_sigma)
    return int(_classify_pitch_roll_array(np.atleast_1d(incline), thresholds)[0])


def _classify_pitch_roll_array(incline, thresholds):
    out = np.ones(np.shape(incline), dtype=np.int64)
    out[incline < thresholds.pitch_roll_vertical_max_deg] = 0
    out[incline > thresholds.pitch_roll_horizontal_min_deg] = 2
    out[np.isnan(incline)] = 1
    return out


def detect_ground_contact(joint_y, ground_y, thresholds=DEFAULT_THRESHOLDS):
    """On the ground iff clearance above the sequence floor is < epsilon (strict)."""
    return int(_classify_ground_array(np.atleast_1d(float(joint_y) - float(ground_y)), thresholds)[0])


def _classify_ground_array(clearance, thresholds):
    return np.where(clearance < thresholds.ground_contact_eps_m, 0, 1)


def classify_root_orientation(rot, axis, thresholds=DEFAULT_THRESHOLDS):
    """Discretize a relative root rotation's angle about one axis into sectors.

    Sector k covers [k*s - s/2, k*s + s/2) degrees for sector width s, so
    adjacent sectors differ by one transition and sector 0 is centered on
    the frame-0 orientation. Returns the signed sector index.
    """
    yaw, pitch, roll = Rotation.from_matrix(np.asarray(rot, dtype=float)).as_euler("YXZ", degrees=True)
    angle = {"Y": yaw, "X": pitch, "Z": roll}[axis]
    return int(_orientation_sector_array(np.atleast_1d(angle), thresholds)[0])


def _orientation_sector_array(angle_deg, thresholds):
    step = thresholds.orientation_sector_deg
    max_sector = int(math.floor(180.0 / step + 0.5))
    sector = np.floor(angle_deg / step + 0.5).astype(np.int64)
    return np.clip(sector, -max_sector, max_sector)


def classify_position(value, thresholds=DEFAULT_THRESHOLDS):
    """Bin a signed axis displacement: round half away from zero, clip at the ends."""
    return int(_position_bin_array(np.atleast_1d(float(value)), thresholds)[0])


def _position_bin_array(value, thresholds):
    step = thresholds.position_step_m
    bins = np.sign(value) * np.floor(np.abs(value) / step + 0.5)
    return np.clip(bins, -thresholds.position_max_bin, thresholds.position_max_bin).astype(np.int64)


################################################################################
## TIMELINE EXTRACTION
################################################################################

def _angle_sigma_kinds():
    return (ANGLE, PITCH_ROLL, ORIENTATION)


def sigma_for_kind(kind, noise):
    return noise.angle_sigma if kind.name in _angle_sigma_kinds() else noise.distance_sigma


def shoulder_width_of(seq, skeleton=DEFAULT_SKELETON):
    """Frame-0 shoulder span used to scale distance posecodes."""
    width = float(np.linalg.norm(
        seq.frames[0, skeleton.index("left_shoulder")] - seq.frames[0, skeleton.index("right_shoulder")]))
    if width < 1e-9:
        warnings.warn("frame-0 shoulders coincide; falling back to reference shoulder width")
        return 0.34
    return width


def extract_posecode_timelines(seq, instances, noise=NO_NOISE, thresholds=DEFAULT_THRESHOLDS,
                               skeleton=DEFAULT_SKELETON):
    """Compute one categorical timeline per posecode instance.

    Per-frame measurement failures (degenerate geometry) become the ignored
    category; they never abort the sequence. With the same seed the output is
    identical run to run, regardless of instance evaluation order.
    """
    frames = seq.frames
    n = len(frames)
    ground_y = float(frames[:, :, 1].min())
    shoulder_width = shoulder_width_of(seq, skeleton)
    euler = None
    jidx = {j: skeleton.index(j) for j in JOINT_NAMES}

    timelines = []
    for inst in instances:
        sigma = sigma_for_kind(inst.kind, noise)
        offs = noise.offsets(inst.index, n, sigma)
        kind = inst.kind.name

        if kind == ANGLE:
            a, v, b = (frames[:, jidx[j]] for j in inst.joints)
            deg = _angle_deg(a - v, b - v) + offs
            cats = np.where(np.isnan(deg), len(ANGLE_CATEGORIES),
                            _classify_angle_array(np.nan_to_num(deg, nan=90.0), thresholds))
            names = ANGLE_CATEGORIES + (IGNORED,)
            ranks = tuple(range(len(ANGLE_CATEGORIES))) + (None,)
        elif kind == DISTANCE:
            a, b = (frames[:, jidx[j]] for j in inst.joints)
            dist = np.linalg.norm(a - b, axis=1) + offs
            cats = _classify_distance_array(dist, shoulder_width, thresholds)
            names = DISTANCE_CATEGORIES
            ranks = tuple(range(len(DISTANCE_CATEGORIES)))
        elif kind == RELATIVE_POSITION:
            a, b = (frames[:, jidx[j]] for j in inst.joints)
            delta = a[:, "XYZ".index(inst.kind.axis)] - b[:, "XYZ".index(inst.kind.axis)] + offs
            cats = _classify_relpos_array(delta, thresholds)
            names = RELPOS_CATEGORIES[inst.kind.axis]
            ranks = (0, None, 1)
        elif kind == PITCH_ROLL:
            top, bottom = (frames[:, jidx[j]] for j in inst.joints)
            incline = _incline_from_vertical_deg(top - bottom) + offs
            cats = _classify_pitch_roll_array(incline, thresholds)
            names = PITCH_ROLL_CATEGORIES
            ranks = (0, None, 1)
        elif kind == GROUND_CONTACT:
            clearance = frames[:, jidx[inst.joints[0]], 1] - ground_y + offs
            cats = _classify_ground_array(clearance, thresholds)
            names = GROUND_CATEGORIES
            ranks = (0, None)
        elif kind == ORIENTATION:
            if euler is None:
                euler = relative_root_euler(frames, skeleton)
            angle = euler[:, {"Y": 0, "X": 1, "Z": 2}[inst.kind.axis]] + offs
            sectors = _orientation_sector_array(angle, thresholds)
            max_sector = int(math.floor(180.0 / thresholds.orientation_sector_deg + 0.5))
            cats = sectors + max_sector
            step = thresholds.orientation_sector_deg
            names = tuple(f"{k * step:+.0f}°" for k in range(-max_sector, max_sector + 1))
            ranks = tuple(range(len(names)))
        elif kind == POSITION:
            axis = "XYZ".index(inst.kind.axis)
            joint = frames[:, jidx[inst.joints[0]], axis]
            if inst.kind.reference == "root-relative":
                value = joint - frames[:, jidx["pelvis"], axis]
            else:
                value = joint - frames[0, jidx[inst.joints[0]], axis]
            bins = _position_bin_array(value + offs, thresholds)
            cats = bins + thresholds.position_max_bin
            step = thresholds.position_step_m
            names = tuple(f"{k * step:+.2f} m"
                          for k in range(-thresholds.position_max_bin, thresholds.position_max_bin + 1))
            ranks = tuple(range(len(names)))
        else:
            raise ValueError(f"unknown posecode kind {inst.kind}")

        timelines.append(PosecodeTimeline(
            instance=inst,
            categories=np.asarray(cats, dtype=np.int64),
            category_names=tuple(names),
            ranks=ranks,
        ))
    return timelines


################################################################################
## DEFAULT INSTANCE SET
################################################################################

def default_instance_specs():
    """The standard posecode instance set, as config-file entries."""
    specs = []

    def add(kind, joints, label=None):
        d = {"kind": kind, "joints": list(joints)}
        if label:
            d["label"] = label
        specs.append(d)

    for side in ("left", "right"):
        add("angle", (f"{side}_shoulder", f"{side}_elbow", f"{side}_wrist"))
        add("angle", (f"{side}_hip", f"{side}_knee", f"{side}_ankle"))

    add("distance", ("left_wrist", "right_wrist"))
    add("distance", ("left_elbow", "right_elbow"))
    add("distance", ("left_knee", "right_knee"))
    add("distance", ("left_ankle", "right_ankle"))
    add("distance", ("left_wrist", "right_foot"))
    add("distance", ("left_elbow", "right_foot"))
    add("distance", ("right_wrist", "left_foot"))
    add("distance", ("right_elbow", "left_foot"))
    add("distance", ("left_wrist", "head"))
    add("distance", ("right_wrist", "head"))

    for axis in "XYZ":
        add(f"relative-position:{axis}", ("left_wrist", "right_wrist"))
    for side in ("left", "right"):
        add("relative-position:Y", (f"{side}_wrist", "head"))
        add("relative-position:Z", (f"{side}_wrist", "head"))

    for side in ("left", "right"):
        add("pitch-roll", (f"{side}_hip", f"{side}_knee"), f"{side} thigh")
        add("pitch-roll", (f"{side}_knee", f"{side}_ankle"), f"{side} shin")
        add("pitch-roll", (f"{side}_shoulder", f"{side}_elbow"), f"{side} upper arm")
        add("pitch-roll", (f"{side}_elbow", f"{side}_wrist"), f"{side} forearm")
    add("pitch-roll", ("neck", "pelvis"), "torso")

    for joint in ("left_foot", "right_foot", "left_ankle", "right_ankle"):
        add("ground-contact", (joint,))

    for axis in "XYZ":
        add(f"orientation:{axis}", ("pelvis",))
    for axis in "XYZ":
        add(f"position:{axis}:global", ("pelvis",))
    for joint in ("left_wrist", "right_wrist", "left_ankle", "right_ankle"):
        for axis in "XYZ":
            add(f"position:{axis}:root-relative", (joint,))
            add(f"position:{axis}:global", (joint,))
    return specs


def instances_from_specs(specs):
    """Build indexed PosecodeInstance objects from config entries."""
    out = []
    for i, spec in enumerate(specs):
        out.append(PosecodeInstance(
            kind=PosecodeKind.parse(spec["kind"]),
            joints=tuple(spec["joints"]),
            label=spec.get("label"),
            index=i,
        ))
    return out


def default_instances():
    return instances_from_specs(default_instance_specs())

"""Canonical 22-joint body skeleton: names, symmetry pairs, entity groups.

The joint list is the body-only subset of the common mocap skeleton layout
(pelvis through wrists, no fingers), in its standard order. All other modules
address joints by these names; frame arrays are indexed in this order.

Axis conventions for a normalized sequence: y is up, the body faces +z at
frame 0, and +x is the body's own left side (so the left wrist of a T-pose
has positive x).
"""

from dataclasses import dataclass, field


JOINT_NAMES = (
    "pelvis",
    "left_hip",
    "right_hip",
    "spine1",
    "left_knee",
    "right_knee",
    "spine2",
    "left_ankle",
    "right_ankle",
    "spine3",
    "left_foot",
    "right_foot",
    "neck",
    "left_collar",
    "right_collar",
    "head",
    "left_shoulder",
    "right_shoulder",
    "left_elbow",
    "right_elbow",
    "left_wrist",
    "right_wrist",
)

SYMMETRY_PAIRS = (
    ("left_hip", "right_hip"),
    ("left_knee", "right_knee"),
    ("left_ankle", "right_ankle"),
    ("left_foot", "right_foot"),
    ("left_collar", "right_collar"),
    ("left_shoulder", "right_shoulder"),
    ("left_elbow", "right_elbow"),
    ("left_wrist", "right_wrist"),
)

ENTITY_GROUPS = {
    "left arm": ("left_collar", "left_shoulder", "left_elbow", "left_wrist"),
    "right arm": ("right_collar", "right_shoulder", "right_elbow", "right_wrist"),
    "left leg": ("left_hip", "left_knee", "left_ankle", "left_foot"),
    "right leg": ("right_hip", "right_knee", "right_ankle", "right_foot"),
    "torso": ("pelvis", "spine1", "spine2", "spine3", "neck"),
}

# Reference T-pose, meters. Arms straight out along x (left arm on +x),
# facing +z, standing on the ground plane. Used by the documented example
# file and as the base pose for synthetic motions.
T_POSE = {
    "pelvis": (0.0, 0.93, 0.0),
    "left_hip": (0.09, 0.87, 0.0),
    "right_hip": (-0.09, 0.87, 0.0),
    "spine1": (0.0, 1.04, 0.0),
    "left_knee": (0.10, 0.48, 0.0),
    "right_knee": (-0.10, 0.48, 0.0),
    "spine2": (0.0, 1.14, 0.0),
    "left_ankle": (0.11, 0.08, 0.0),
    "right_ankle": (-0.11, 0.08, 0.0),
    "spine3": (0.0, 1.22, 0.0),
    "left_foot": (0.11, 0.02, 0.12),
    "right_foot": (-0.11, 0.02, 0.12),
    "neck": (0.0, 1.42, 0.0),
    "left_collar": (0.05, 1.35, 0.0),
    "right_collar": (-0.05, 1.35, 0.0),
    "head": (0.0, 1.55, 0.0),
    "left_shoulder": (0.17, 1.40, 0.0),
    "right_shoulder": (-0.17, 1.40, 0.0),
    "left_elbow": (0.45, 1.40, 0.0),
    "right_elbow": (-0.45, 1.40, 0.0),
    "left_wrist": (0.72, 1.40, 0.0),
    "right_wrist": (-0.72, 1.40, 0.0),
}


class SkeletonError(ValueError):
    """Raised when a skeleton definition violates its structural rules."""


@dataclass(frozen=True)
class SkeletonSpec:
    """Joint layout: ordered names, left/right pairing, and named groups."""

    joints: tuple = JOINT_NAMES
    symmetry_pairs: tuple = SYMMETRY_PAIRS
    entity_groups: dict = field(default_factory=lambda: dict(ENTITY_GROUPS))

    def __post_init__(self):
        if len(self.joints) != 22:
            raise SkeletonError(f"skeleton must have exactly 22 joints, got {len(self.joints)}")
        if len(set(self.joints)) != len(self.joints):
            raise SkeletonError("duplicate joint names")
        for left, right in self.symmetry_pairs:
            if not (left.startswith("left") and right.startswith("right")):
                raise SkeletonError(f"symmetry pair ({left}, {right}) must map a left joint to a right joint")
            if left.replace("left", "", 1) != right.replace("right", "", 1):
                raise SkeletonError(f"symmetry pair ({left}, {right}) does not match base names")
            if left not in self.joints or right not in self.joints:
                raise SkeletonError(f"symmetry pair ({left}, {right}) names unknown joints")
        for name, members in self.entity_groups.items():
            if not members:
                raise SkeletonError(f"entity group '{name}' is empty")
            unknown = set(members) - set(self.joints)
            if unknown:
                raise SkeletonError(f"entity group '{name}' names unknown joints: {sorted(unknown)}")

    def index(self, joint):
        return self.joints.index(joint)

    def mirror_map(self):
        """Joint name -> mirrored joint name (central joints map to themselves)."""
        table = {j: j for j in self.joints}
        for left, right in self.symmetry_pairs:
            table[left] = right
            table[right] = left
        return table

    def mirror_index_perm(self):
        """Channel permutation that swaps left/right joint columns."""
        table = self.mirror_map()
        return [self.index(table[j]) for j in self.joints]

    def entity_groups_containing(self, joints):
        """Names of entity groups containing every joint in `joints`, smallest first."""
        wanted = set(joints)
        hits = [name for name, members in self.entity_groups.items() if wanted <= set(members)]
        return sorted(hits, key=lambda n: (len(self.entity_groups[n]), n))


def display_name(joint):
    """Human-readable joint name: 'left_wrist' -> 'left wrist', 'pelvis' -> 'body'."""
    if joint == "pelvis":
        return "body"
    return joint.replace("_", " ")


def plural_name(joint):
    """Plural base name for a symmetric pair member: 'left_elbow' -> 'elbows'."""
    base = joint.replace("left_", "").replace("right_", "").replace("_", " ")
    if base.endswith("foot"):
        return base[:-4] + "feet"
    return base + "s"


DEFAULT_SKELETON = SkeletonSpec()

"""Shared fixtures: synthetic motion builders over the reference T-pose."""

import numpy as np
import pytest

from motiontext.motion_io import MotionSequence
from motiontext.posecodes import (ANGLE_CATEGORIES, IGNORED, PosecodeInstance,
                                  PosecodeKind, PosecodeTimeline)
from motiontext.skeleton import JOINT_NAMES, T_POSE

FOREARM_LEN = 0.27
SHIN_LEN = 0.40


def tpose_frames(n):
    """n copies of the reference T-pose, shape (n, 22, 3)."""
    base = np.array([T_POSE[j] for j in JOINT_NAMES], dtype=np.float64)
    return np.tile(base, (n, 1, 1))


def jidx(name):
    return JOINT_NAMES.index(name)


def set_elbow_angle(frames, t, side, deg):
    """Place the wrist so the elbow's interior angle equals `deg` (bend sweeps downward)."""
    s, e, w = (jidx(f"{side}_{j}") for j in ("shoulder", "elbow", "wrist"))
    upper = frames[t, e] - frames[t, s]
    u = upper / np.linalg.norm(upper)
    alpha = np.radians(180.0 - deg)
    v = np.array([0.0, -1.0, 0.0])
    frames[t, w] = frames[t, e] + FOREARM_LEN * (np.cos(alpha) * u + np.sin(alpha) * v)


def set_knee_angle(frames, t, side, deg):
    """Place ankle (and foot, rigidly) so the knee's interior angle equals `deg`."""
    h, k, a, f = (jidx(f"{side}_{j}") for j in ("hip", "knee", "ankle", "foot"))
    thigh = frames[t, k] - frames[t, h]
    u = thigh / np.linalg.norm(thigh)
    alpha = np.radians(180.0 - deg)
    v = np.array([0.0, 0.0, -1.0])
    foot_offset = frames[t, f] - frames[t, a]
    frames[t, a] = frames[t, k] + SHIN_LEN * (np.cos(alpha) * u + np.sin(alpha) * v)
    frames[t, f] = frames[t, a] + foot_offset


def make_seq(frames, fps=20.0, normalized=False):
    return MotionSequence(fps=fps, frames=np.asarray(frames, dtype=np.float64),
                          normalized=normalized)


def synthetic_timeline(ordinals, n_categories=6, with_ignored=False):
    """Timeline over a fake angle instance for segmentation unit tests.

    Ordinal `n_categories` (only valid when with_ignored) is the transparent
    ignored category.
    """
    names = ANGLE_CATEGORIES[:n_categories]
    ranks = tuple(range(n_categories))
    if with_ignored:
        names = names + (IGNORED,)
        ranks = ranks + (None,)
    instance = PosecodeInstance(
        kind=PosecodeKind("angle"),
        joints=("left_shoulder", "left_elbow", "left_wrist"),
        index=0,
    )
    return PosecodeTimeline(instance=instance,
                            categories=np.asarray(ordinals, dtype=np.int64),
                            category_names=names,
                            ranks=ranks)


@pytest.fixture
def tpose_seq():
    return make_seq(tpose_frames(4))

"""The five merge rules, one scripted scene each.

Each scene is built geometrically, run through the full pipeline with
p_rule = 1 (merges always fire) and noise off, and the aggregation trace is
printed: which codes merged, under which rule, with which subject.
"""

import numpy as np

from motiontext import JOINT_NAMES, MotionSequence, T_POSE
from motiontext.pipeline import PipelineConfig, caption_sequence

BASE = np.array([T_POSE[j] for j in JOINT_NAMES])


def j(name):
    return JOINT_NAMES.index(name)


def bend_elbow(frames, t, side, deg):
    s, e, w = (j(f"{side}_{x}") for x in ("shoulder", "elbow", "wrist"))
    u = frames[t, e] - frames[t, s]
    u /= np.linalg.norm(u)
    alpha = np.radians(180.0 - deg)
    frames[t, w] = frames[t, e] + 0.27 * (np.cos(alpha) * u + np.sin(alpha) * np.array([0, -1, 0]))


def show(title, frames, fps=60.0, **config_overrides):
    config = PipelineConfig.defaults(noise_enabled=False, p_rule=1.0,
                                     inject_start_prob=0.0, inject_end_prob=0.0,
                                     **config_overrides)
    doc = caption_sequence(MotionSequence(fps=fps, frames=frames), config, seed=1)
    print(f"\n== {title}")
    for item in doc.intermediate["aggregation"]:
        joints = sorted({jj for m in item["members"] for jj in m["instance"]["joints"]})
        print(f"  {'+'.join(item['rule_trace']):24s} subject={item['subject_phrase']!r} "
              f"bins={[m['bin'] for m in item['members']]} lead={item['lead_tag']}")
        print(f"  {'':24s} members={[m['direction_label'] for m in item['members']]} joints={joints}")
    print(f"  caption: {doc.text}")


# symmetry: both elbows do the same thing at the same time
frames = np.tile(BASE, (60, 1, 1))
for t in range(60):
    for side in ("left", "right"):
        bend_elbow(frames, t, side, 179.0 - 138.0 * t / 59)
show("symmetry: two elbows one subject", frames)

# entity: wrist and elbow both close on the right foot -> whole arm
frames = np.tile(BASE, (50, 1, 1))
foot = BASE[j("right_foot")]
for t in range(50):
    p = t / 49
    for joint, off in (("left_wrist", [0.04, 0.10, 0.05]), ("left_elbow", [-0.05, 0.12, -0.04])):
        frames[t, j(joint)] = BASE[j(joint)] + p * (foot + off - BASE[j(joint)])
show("entity: left wrist + left elbow -> left arm", frames)

# interpretation: different joints, same labels, one compound sentence
frames = np.tile(BASE, (60, 1, 1))
for t in range(60):
    bend_elbow(frames, t, "left", 179.0 - 90.0 * t / 59)
    # right knee bends by moving ankle+foot
    h, k, a, f = (j(f"right_{x}") for x in ("hip", "knee", "ankle", "foot"))
    u = frames[t, k] - frames[t, h]
    u /= np.linalg.norm(u)
    alpha = np.radians(90.0 * t / 59)
    off = frames[t, f] - frames[t, a]
    frames[t, a] = frames[t, k] + 0.40 * (np.cos(alpha) * u + np.sin(alpha) * np.array([0, 0, -1]))
    frames[t, f] = frames[t, a] + off
show("interpretation: left elbow and right knee together", frames)

# keypoint + timecode: one subject, two actions, plus a later back-reference
frames = np.tile(BASE, (72, 1, 1))
for t in range(72):
    if t <= 15:
        deg = 179.0 - 118.0 * t / 15
    elif t <= 50:
        deg = 61.0
    else:
        deg = min(61.0 + 5.7 * (t - 50), 175.0)
    bend_elbow(frames, t, "right", deg)
show("keypoint chain across six bins", frames, fps=20.0, t_range_bins=5)

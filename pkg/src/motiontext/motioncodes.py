"""Dynamic segment detection over posecode timelines and motioncode attributes.

A motioncode is one detected stretch of same-direction category change in a
posecode timeline. Detection runs in three stages:

1. Hysteresis: ignored-category frames are dropped (transitions are measured
   between the flanking measurable categories) and any category run shorter
   than ``min_run`` frames is rewritten to the surrounding stable category,
   so flicker between adjacent categories is never counted.
2. Transition merging: consecutive transitions with the same sign merge into
   one segment as long as the stable run between them spans at most
   ``max_range`` frames; a direction flip or a longer stationary gap closes
   the segment.
3. Attributes: the spatial attribute is the signed sum of counted ordinal
   changes over the segment, and the velocity attribute is its magnitude
   divided by the segment length in frames.

A segment starts at the first frame of the stable run the motion leaves and
ends at the last frame of the run it arrives in (clipped so consecutive
segments never overlap).
"""

from dataclasses import dataclass, replace

import numpy as np

from .posecodes import (ANGLE, DISTANCE, GROUND_CONTACT, ORIENTATION, PITCH_ROLL,
                        POSITION, RELATIVE_POSITION)

_MASK64 = (1 << 64) - 1


################################################################################
## FAMILIES AND LABEL TABLES
################################################################################

ANGULAR = "angular"
PROXIMITY = "proximity"
SPATIAL_RELATION = "spatial-relation"
DISPLACEMENT = "displacement"
ROTATION = "rotation"

FAMILY_OF_KIND = {
    ANGLE: ANGULAR,
    DISTANCE: PROXIMITY,
    RELATIVE_POSITION: SPATIAL_RELATION,
    POSITION: DISPLACEMENT,
    ORIENTATION: ROTATION,
    # pitch-roll and ground-contact are static/intermediate only
    PITCH_ROLL: None,
    GROUND_CONTACT: None,
}

# (negative-direction label, positive-direction label) per family and,
# where it matters, per axis. Positive direction means increasing ordinal
# rank: more bent, farther apart, toward +axis, turning counter-clockwise.
DIRECTION_LABELS = {
    (ANGULAR, None): ("extending", "bending"),
    (PROXIMITY, None): ("closing", "spreading"),
    (SPATIAL_RELATION, "X"): ("left-to-right", "right-to-left"),
    (SPATIAL_RELATION, "Y"): ("above-to-below", "below-to-above"),
    (SPATIAL_RELATION, "Z"): ("front-to-behind", "behind-to-front"),
    (DISPLACEMENT, "X"): ("rightward", "leftward"),
    (DISPLACEMENT, "Y"): ("downward", "upward"),
    (DISPLACEMENT, "Z"): ("backward", "forward"),
    (ROTATION, "X"): ("leaning backward", "leaning forward"),
    (ROTATION, "Y"): ("turning clockwise", "turning counter-clockwise"),
    (ROTATION, "Z"): ("leaning left", "leaning right"),
}

INTENSITY_CLASSES = ("stationary", "slight", "moderate", "significant")
VELOCITY_CLASSES = ("very slow", "slow", "moderate", "fast", "very fast")


def family_of(kind):
    return FAMILY_OF_KIND[kind.name]


def direction_label(family, axis, sign):
    key = (family, axis if (family, axis) in DIRECTION_LABELS else None)
    pair = DIRECTION_LABELS[key]
    return pair[1] if sign > 0 else pair[0]


def intensity_class(m_s, edges=(1, 2, 3)):
    """Intensity from |M_S|: 0 stationary, then slight/moderate/significant."""
    mag = abs(m_s)
    if mag == 0:
        return "stationary"
    if mag >= edges[2]:
        return "significant"
    if mag >= edges[1]:
        return "moderate"
    return "slight"


################################################################################
## SEGMENT DETECTION
################################################################################

@dataclass(frozen=True)
class StableRun:
    ordinal: int
    rank: int
    start: int    # first original frame of the run
    end: int      # last original frame of the run

    @property
    def span(self):
        return self.end - self.start + 1


@dataclass(frozen=True)
class MotionSegment:
    """One same-direction stretch of counted transitions in a timeline."""

    instance: object
    T_s: int
    T_e: int
    direction: int                      # +1 or -1
    transitions: tuple                  # (boundary frame, signed rank delta) pairs
    start_ordinal: int
    end_ordinal: int

    @property
    def n_transitions(self):
        return sum(abs(d) for _, d in self.transitions)


def hysteresis_runs(ordinals, ranks, min_run):
    """Stable category runs after dropping ignored frames and flicker.

    Returns StableRun objects over original frame indices. A run is stable
    when it holds at least ``min_run`` measurable frames; unstable runs are
    absorbed into the neighboring stable category (leading ones take the
    first stable category). With no stable run at all the sequence is
    treated as constant.
    """
    if min_run < 1:
        raise ValueError("min_run must be >= 1")
    pts = [(t, int(o)) for t, o in enumerate(ordinals) if ranks[int(o)] is not None]
    if not pts:
        return []
    raw = []
    for t, o in pts:
        if raw and raw[-1][0] == o:
            raw[-1][2] = t
            raw[-1][3] += 1
        else:
            raw.append([o, t, t, 1])  # ordinal, start, end, measurable count
    stable_idx = [i for i, r in enumerate(raw) if r[3] >= min_run]
    if not stable_idx:
        first = raw[0][0]
        return [StableRun(first, ranks[first], raw[0][1], raw[-1][2])]
    # leading unstable runs take the first stable category; later unstable
    # runs keep the last stable category seen
    current = raw[stable_idx[0]][0]
    rewritten = []
    for i, r in enumerate(raw):
        if r[3] >= min_run:
            current = r[0]
        rewritten.append((current, r[1], r[2]))
    merged = []
    for o, start, end in rewritten:
        if merged and merged[-1][0] == o:
            merged[-1][2] = end
        else:
            merged.append([o, start, end])
    return [StableRun(o, ranks[o], s, e) for o, s, e in merged]


def detect_motion_segments(timeline, max_range=10**9, min_run=3, min_transitions=1):
    """Detect same-direction motion segments in one posecode timeline.

    Args:
        timeline: PosecodeTimeline to scan.
        max_range: largest stationary gap, in frames, allowed between two
            counted transitions inside one segment.
        min_run: frames a new category must persist before its transition
            counts (flicker hysteresis).
        min_transitions: minimum counted transitions for a segment to be kept.

    Returns:
        MotionSegments ordered by T_s, disjoint up to shared endpoints.
    """
    runs = hysteresis_runs(timeline.categories, timeline.ranks, min_run)
    return _segments_from_runs(runs, timeline.instance, max_range, min_transitions)


def _segments_from_runs(runs, instance, max_range, min_transitions):
    if len(runs) < 2:
        return []
    deltas = [runs[i + 1].rank - runs[i].rank for i in range(len(runs) - 1)]
    segments = []
    chain_start = 0
    prev_end = None

    def close(chain_start, chain_end):
        total = sum(deltas[chain_start:chain_end + 1])
        if abs(total) < min_transitions:
            return
        t_s = runs[chain_start].start
        if prev_end is not None:
            t_s = max(t_s, prev_end)
        t_e = runs[chain_end + 1].end
        transitions = tuple((runs[i + 1].start, deltas[i]) for i in range(chain_start, chain_end + 1))
        segments.append(MotionSegment(
            instance=instance,
            T_s=t_s,
            T_e=t_e,
            direction=1 if total > 0 else -1,
            transitions=transitions,
            start_ordinal=runs[chain_start].ordinal,
            end_ordinal=runs[chain_end + 1].ordinal,
        ))

    for i in range(1, len(deltas)):
        same_dir = (deltas[i] > 0) == (deltas[i - 1] > 0)
        gap_ok = runs[i].span <= max_range
        if same_dir and gap_ok:
            continue
        close(chain_start, i - 1)
        if segments:
            prev_end = segments[-1].T_e
        chain_start = i
    close(chain_start, len(deltas) - 1)
    return segments


def compute_spatial_attribute(segment, timeline=None):
    """Signed cumulative count of category transitions over the segment."""
    return int(sum(d for _, d in segment.transitions))


def compute_velocity_attribute(m_s, t_s, t_e, fps, edges_per_second=(0.5, 1.5, 3.0, 6.0)):
    """Velocity attribute and class.

    M_V is |M_S| per frame over the segment; the class thresholds are in
    transitions per second, so M_V is scaled by fps before binning.
    """
    if t_e <= t_s:
        raise ValueError("segment must satisfy T_e > T_s")
    m_v = abs(m_s) / (t_e - t_s)
    rate = m_v * fps
    idx = int(np.digitize(rate, edges_per_second))
    return m_v, VELOCITY_CLASSES[idx]


################################################################################
## MOTIONCODES
################################################################################

@dataclass(frozen=True)
class Motioncode:
    """One detected movement: family, joint set, interval, and attributes."""

    family: str
    instance: object
    T_s: int
    T_e: int
    M_S: int
    M_V: float
    velocity_class: str
    intensity_class: str            # None for spatial-relation codes
    direction_label: str
    start_category: int
    end_category: int
    subject: object = None          # SubjectChoice, filled before aggregation
    bin: int = None                 # time bin, filled by assign_bins

    @property
    def duration(self):
        return self.T_e - self.T_s

    def with_subject(self, subject):
        return replace(self, subject=subject)

    def with_bin(self, b):
        return replace(self, bin=b)


@dataclass(frozen=True)
class MotioncodeConfig:
    min_run: int = 3
    min_transitions: int = 1
    max_gap_seconds: float = 0.25
    intensity_edges: tuple = (1, 2, 3)
    velocity_edges_per_second: tuple = (0.5, 1.5, 3.0, 6.0)
    velocity_edge_noise_frac: float = 0.10
    noise_enabled: bool = False
    velocity_seed: int = 0

    def max_range_frames(self, fps):
        return max(1, round(self.max_gap_seconds * fps))


def _velocity_edges_for(config, instance_index, draw_index):
    """Velocity class edges, optionally perturbed per code (multiplicative).

    Perturbed edges are re-sorted: a large draw on a low edge must not leave
    the thresholds out of order.
    """
    edges = np.asarray(config.velocity_edges_per_second, dtype=float)
    if not config.noise_enabled or config.velocity_edge_noise_frac == 0.0:
        return edges
    bits = np.random.Philox(key=[config.velocity_seed & _MASK64, instance_index & _MASK64])
    noise = np.random.Generator(bits).standard_normal((draw_index + 1, len(edges)))[draw_index]
    return np.sort(np.maximum(edges * (1.0 + config.velocity_edge_noise_frac * noise), 1e-9))


def build_motioncodes(timelines, seq, config=MotioncodeConfig()):
    """Detect and label motioncodes across all timelines.

    Timelines whose posecode kind has no dynamic family (pitch/roll, ground
    contact) are skipped. Output order is canonical: instance index, then T_s.
    """
    max_range = config.max_range_frames(seq.fps)
    codes = []
    for timeline in timelines:
        family = family_of(timeline.instance.kind)
        if family is None:
            continue
        segments = detect_motion_segments(timeline, max_range, config.min_run, config.min_transitions)
        for k, segment in enumerate(segments):
            m_s = compute_spatial_attribute(segment)
            if m_s == 0:
                continue
            edges = _velocity_edges_for(config, timeline.instance.index, k)
            m_v, vel_class = compute_velocity_attribute(m_s, segment.T_s, segment.T_e, seq.fps, edges)
            codes.append(Motioncode(
                family=family,
                instance=timeline.instance,
                T_s=segment.T_s,
                T_e=segment.T_e,
                M_S=m_s,
                M_V=m_v,
                velocity_class=vel_class,
                intensity_class=(None if family == SPATIAL_RELATION
                                 else intensity_class(m_s, config.intensity_edges)),
                direction_label=direction_label(family, timeline.instance.kind.axis,
                                                1 if m_s > 0 else -1),
                start_category=segment.start_ordinal,
                end_category=segment.end_ordinal,
            ))
    codes.sort(key=lambda c: (c.instance.index, c.T_s))
    return codes

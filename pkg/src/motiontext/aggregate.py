"""Motioncode selection, time binning, and merge rules.

Selection drops non-discriminative codes (stationary, weak angular/proximity
changes that are not flagged rare, duplicates implied by a stronger code on
the same joints) and keeps the top N by (rarity, intensity, duration).

Aggregation assigns each survivor to a fixed-width time bin, treats co-binned
codes as concurrent, and merges them with five rules applied in a fixed
order: symmetry, entity, interpretation, keypoint, then timecode ordering.
Each applicable merge fires with probability p_rule from the caller's seeded
generator; canonical pre-sorting makes the outcome independent of input
order.
"""

from dataclasses import dataclass, field

import numpy as np

from .motioncodes import ANGULAR, PROXIMITY, ROTATION
from .skeleton import display_name, plural_name

RELATION_SIMULTANEOUS = "simultaneous"
RELATION_IMMEDIATELY_AFTER = "immediately-after"
RELATION_FEW_SECONDS_LATER = "few-seconds-later"
RELATION_A_MOMENT_BEFORE = "a-moment-before"


def relation_for_gap(bins_apart):
    if bins_apart <= 0:
        return RELATION_SIMULTANEOUS
    if bins_apart == 1:
        return RELATION_IMMEDIATELY_AFTER
    return RELATION_FEW_SECONDS_LATER


################################################################################
## SALIENCE
################################################################################

@dataclass(frozen=True)
class SalienceStats:
    """Frequencies of (family, intensity, velocity) label combinations.

    `rare_patterns` entries may use None as a wildcard. A combination is
    rare when it matches a pattern or when its corpus frequency is at or
    below the stored cutoff.
    """

    frequencies: dict = field(default_factory=dict)
    rare_patterns: tuple = ()
    rare_cutoff: float = None

    @staticmethod
    def default():
        return SalienceStats(rare_patterns=(
            (None, "significant", None),
            (None, None, "very fast"),
            (None, None, "very slow"),
        ))

    @staticmethod
    def from_label_counts(counts, percentile=5.0):
        """Corpus mode: combinations in the lowest tail of frequency are rare."""
        total = sum(counts.values())
        if total == 0:
            return SalienceStats.default()
        freqs = {key: n / total for key, n in counts.items()}
        cutoff = float(np.percentile(sorted(freqs.values()), percentile))
        return SalienceStats(frequencies=freqs, rare_cutoff=cutoff)

    def is_rare(self, code):
        key = (code.family, code.intensity_class, code.velocity_class)
        for fam, intensity, velocity in self.rare_patterns:
            if ((fam is None or fam == key[0])
                    and (intensity is None or intensity == key[1])
                    and (velocity is None or velocity == key[2])):
                return True
        if self.rare_cutoff is not None:
            return self.frequencies.get(key, 0.0) <= self.rare_cutoff
        return False


def ranking_key(code, rare):
    """Sort key for selection: rare first, then |M_S|, then duration."""
    return (not rare, -abs(code.M_S), -code.duration, code.T_s, code.instance.index)


def select_motioncodes(codes, stats=None, n_max=8, drop_slight_families=(ANGULAR, PROXIMITY)):
    """Keep the most informative motioncodes.

    Drops stationary codes, drops slight angular/proximity codes unless their
    label combination is rare, removes codes implied by a stronger code on
    the same joints with an overlapping interval, then keeps the top n_max
    by (rarity, |M_S|, duration). Output is in canonical order.
    """
    stats = stats or SalienceStats.default()
    kept = [c for c in codes
            if c.M_S != 0 and c.intensity_class != "stationary"
            and not (c.intensity_class == "slight"
                     and c.family in drop_slight_families
                     and not stats.is_rare(c))]

    # de-duplicate: same family/kind/axis/joints/direction with overlapping
    # intervals keeps only the strongest occurrence
    def dedup_key(c):
        return (c.family, c.instance.kind.name, c.instance.kind.axis,
                frozenset(c.instance.joints), c.M_S > 0)

    survivors = []
    for code in sorted(kept, key=lambda c: ranking_key(c, stats.is_rare(c))):
        clash = any(dedup_key(code) == dedup_key(other)
                    and code.T_s <= other.T_e and other.T_s <= code.T_e
                    for other in survivors)
        if not clash:
            survivors.append(code)

    ranked = sorted(survivors, key=lambda c: ranking_key(c, stats.is_rare(c)))[:n_max]
    ranked.sort(key=lambda c: (c.instance.index, c.T_s))
    return ranked


################################################################################
## BINNING
################################################################################

def assign_bins(codes, t_w):
    """Half-open binning: a code with start T_s lands in bin T_s // T_w."""
    if t_w < 1:
        raise ValueError("T_w must be >= 1 frame")
    out = {}
    for code in codes:
        out.setdefault(code.T_s // t_w, []).append(code.with_bin(code.T_s // t_w))
    return out


################################################################################
## AGGREGATED MOTIONS
################################################################################

@dataclass
class AggregatedMotion:
    """A merged group of motioncodes rendered as one caption clause."""

    members: list
    subject_phrase: str
    subject_key: str
    subject_plural: bool
    relation_tags: list            # between consecutive members
    rule_trace: list
    bin_anchor: int
    lead_tag: str = None           # connective relative to the previous item

    def last_bin(self):
        return max(m.bin for m in self.members)

    def joint_set(self):
        joints = set()
        for m in self.members:
            joints.update(m.instance.subject_joints)
        return joints


def subject_key_of(code):
    """Stable identity of the described subject, for keypoint chaining."""
    subj = code.subject
    if subj is not None and subj.mode == "single-joint":
        return subj.joint
    if subj is not None and subj.mode == "mutual":
        return "+".join(sorted(code.instance.joints))
    if code.family == ROTATION:
        return "pelvis"
    return code.instance.subject_joints[0]


def subject_phrase_of(code):
    subj = code.subject
    if subj is not None and subj.mode == "mutual":
        a, b = code.instance.joints
        return f"the {display_name(a)} and the {display_name(b)}", True
    return f"the {display_name(subject_key_of(code))}", False


def counterpart_of(code):
    """Display phrase for the non-subject joint of a two-joint code, if any."""
    if len(code.instance.joints) != 2:
        return None
    subj = code.subject
    if subj is not None and subj.mode == "mutual":
        return "each other"
    key = subject_key_of(code)
    other = [j for j in code.instance.joints if j != key]
    return f"the {display_name(other[0])}" if other else None


def singleton(code):
    phrase, plural = subject_phrase_of(code)
    return AggregatedMotion(
        members=[code],
        subject_phrase=phrase,
        subject_key=subject_key_of(code),
        subject_plural=plural,
        relation_tags=[],
        rule_trace=["singleton"],
        bin_anchor=code.bin,
    )


def _canonical(items):
    items.sort(key=lambda it: (it.bin_anchor, min(m.T_s for m in it.members),
                               min(m.instance.index for m in it.members)))
    return items


def _merge_labels(item):
    code = item.members[0]
    return (code.family, code.direction_label, code.intensity_class)


def _is_singleton(item):
    return item.rule_trace == ["singleton"]


################################################################################
## MERGE RULES
################################################################################

def aggregate_symmetry(items, skeleton, rng, p_rule=0.75):
    """Merge co-binned twin codes on a left/right joint pair into one plural subject."""
    mirror = skeleton.mirror_map()
    items = _canonical(list(items))
    out, used = [], set()
    for i, a in enumerate(items):
        if i in used or not _is_singleton(a):
            if i not in used:
                out.append(a)
                used.add(i)
            continue
        code_a = a.members[0]
        mirrored = tuple(mirror[j] for j in code_a.instance.joints)
        merged = False
        for j in range(i + 1, len(items)):
            if j in used or not _is_singleton(items[j]):
                continue
            code_b = items[j].members[0]
            if (code_b.bin == code_a.bin
                    and code_b.instance.kind == code_a.instance.kind
                    and tuple(code_b.instance.joints) == mirrored
                    and mirrored != tuple(code_a.instance.joints)
                    and _merge_labels(items[j]) == _merge_labels(a)
                    and rng.random() < p_rule):
                sided = [x for x in code_a.instance.subject_joints if x in mirror and mirror[x] != x]
                base = sided[0] if sided else code_a.instance.subject_joints[0]
                out.append(AggregatedMotion(
                    members=[code_a, code_b],
                    subject_phrase=f"the {plural_name(base)}",
                    subject_key=plural_name(base),
                    subject_plural=True,
                    relation_tags=[RELATION_SIMULTANEOUS],
                    rule_trace=["symmetry"],
                    bin_anchor=code_a.bin,
                ))
                used.update((i, j))
                merged = True
                break
        if not merged:
            out.append(a)
            used.add(i)
    return out


def _pairwise_entity_parts(code_a, code_b):
    """(own joints, shared counterpart) for an entity merge of two codes.

    Two-joint codes must share exactly one joint (the counterpart); the
    remaining joints are the moving parts. One-joint-subject codes have no
    counterpart and contribute their subject joints directly. Returns
    (None, None) when the codes cannot be split consistently.
    """
    ja, jb = set(code_a.instance.joints), set(code_b.instance.joints)
    two_a = len(code_a.instance.subject_joints) == 2
    two_b = len(code_b.instance.subject_joints) == 2
    if two_a != two_b:
        return None, None
    if two_a:
        shared = ja & jb
        if len(shared) != 1:
            return None, None
        return (ja | jb) - shared, shared
    return (set(code_a.instance.subject_joints) | set(code_b.instance.subject_joints)), set()


def aggregate_entity(items, skeleton, rng, p_rule=0.75):
    """Merge co-binned codes whose moving joints span one larger body entity.

    Codes must share family, direction, and intensity, and (for two-joint
    codes) the same counterpart joint; their own joints must all belong to a
    single entity group.
    """
    items = _canonical(list(items))
    out, used = [], set()
    for i, a in enumerate(items):
        if i in used:
            continue
        if not _is_singleton(a):
            out.append(a)
            used.add(i)
            continue
        code_a = a.members[0]
        group = [i]
        own, counterpart = None, None
        for j in range(i + 1, len(items)):
            if j in used or not _is_singleton(items[j]):
                continue
            code_b = items[j].members[0]
            if code_b.bin != code_a.bin or _merge_labels(items[j]) != _merge_labels(a):
                continue
            pair_own, pair_counter = _pairwise_entity_parts(code_a, code_b)
            if pair_own is None:
                continue
            if counterpart is not None and pair_counter != counterpart:
                continue
            candidate = pair_own if own is None else own | pair_own
            if len(candidate) >= 2 and skeleton.entity_groups_containing(candidate):
                group.append(j)
                own, counterpart = candidate, pair_counter
        if len(group) >= 2 and rng.random() < p_rule:
            entity = skeleton.entity_groups_containing(own)[0]
            members = sorted((items[k].members[0] for k in group),
                             key=lambda c: (c.T_s, c.instance.index))
            out.append(AggregatedMotion(
                members=members,
                subject_phrase=f"the {entity}",
                subject_key=entity,
                subject_plural=False,
                relation_tags=[RELATION_SIMULTANEOUS] * (len(members) - 1),
                rule_trace=["entity"],
                bin_anchor=code_a.bin,
            ))
            used.update(group)
        else:
            out.append(a)
            used.add(i)
    return out


def aggregate_interpretation(items, t_range, rng, p_rule=0.75):
    """Merge same-labelled codes on different joints into a compound subject."""
    items = _canonical(list(items))
    out, used = [], set()
    for i, a in enumerate(items):
        if i in used:
            continue
        merged = False
        for j in range(i + 1, len(items)):
            if j in used:
                continue
            b = items[j]
            if (abs(b.bin_anchor - a.bin_anchor) <= t_range
                    and _merge_labels(b) == _merge_labels(a)
                    and a.joint_set().isdisjoint(b.joint_set())
                    and rng.random() < p_rule):
                first, second = (a, b) if a.bin_anchor <= b.bin_anchor else (b, a)
                tag = relation_for_gap(second.bin_anchor - first.bin_anchor)
                trace = [t for t in a.rule_trace + b.rule_trace if t != "singleton"]
                out.append(AggregatedMotion(
                    members=first.members + second.members,
                    subject_phrase=f"{first.subject_phrase} and {second.subject_phrase}",
                    subject_key=f"{first.subject_key}+{second.subject_key}",
                    subject_plural=True,
                    relation_tags=(first.relation_tags + [tag] + second.relation_tags),
                    rule_trace=trace + ["interpretation"],
                    bin_anchor=first.bin_anchor,
                ))
                used.update((i, j))
                merged = True
                break
        if not merged:
            out.append(a)
            used.add(i)
    return out


def aggregate_keypoint(items, t_range, rng, p_rule=0.75):
    """Chain distinct actions of one subject across nearby bins."""
    items = _canonical(list(items))
    out, used = [], set()
    for i, a in enumerate(items):
        if i in used:
            continue
        chain = a
        used.add(i)
        for j in range(i + 1, len(items)):
            if j in used:
                continue
            b = items[j]
            if (b.subject_key == chain.subject_key
                    and b.bin_anchor - chain.last_bin() <= t_range
                    and rng.random() < p_rule):
                tag = relation_for_gap(b.bin_anchor - chain.last_bin())
                trace = [t for t in chain.rule_trace + b.rule_trace if t != "singleton"]
                chain = AggregatedMotion(
                    members=chain.members + b.members,
                    subject_phrase=chain.subject_phrase,
                    subject_key=chain.subject_key,
                    subject_plural=chain.subject_plural,
                    relation_tags=(chain.relation_tags + [tag] + b.relation_tags),
                    rule_trace=trace + ["keypoint"] if "keypoint" not in trace else trace,
                    bin_anchor=chain.bin_anchor,
                )
                used.add(j)
        out.append(chain)
    return out


def order_timecodes(items):
    """Chronological ordering with back-reference tags.

    Items are sorted by bin anchor. When a chained item spans past the next
    item's anchor, the next item is tagged as happening a moment before the
    chain's end; otherwise the lead tag reflects the anchor gap.
    """
    items = _canonical(list(items))
    for idx, item in enumerate(items):
        if idx == 0:
            item.lead_tag = None
        else:
            prev = items[idx - 1]
            if prev.last_bin() > item.bin_anchor:
                item.lead_tag = RELATION_A_MOMENT_BEFORE
            else:
                item.lead_tag = relation_for_gap(item.bin_anchor - prev.bin_anchor)
    return items


################################################################################
## DRIVER
################################################################################

@dataclass(frozen=True)
class AggregationConfig:
    t_w_seconds: float = 0.5
    t_range_bins: int = 2
    p_rule: float = 0.75

    def t_w_frames(self, fps):
        return max(1, round(self.t_w_seconds * fps))


def aggregate_all(codes, skeleton, fps, config=AggregationConfig(), rng=None):
    """Run binning and every merge rule in canonical order."""
    rng = rng or np.random.default_rng(0)
    binned = assign_bins(codes, config.t_w_frames(fps))
    items = []
    for b in sorted(binned):
        bin_items = [singleton(c) for c in binned[b]]
        bin_items = aggregate_symmetry(bin_items, skeleton, rng, config.p_rule)
        bin_items = aggregate_entity(bin_items, skeleton, rng, config.p_rule)
        items.extend(bin_items)
    items = aggregate_interpretation(items, config.t_range_bins, rng, config.p_rule)
    items = aggregate_keypoint(items, config.t_range_bins, rng, config.p_rule)
    return order_timecodes(items)

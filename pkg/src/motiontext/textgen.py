"""Caption rendering: templates, subject selection, and pose injection.

The template library is a plain-text file of ``[dotted.section]`` headers
with one phrase per line. Phrases may contain slot markers
(⟨subject⟩, ⟨verb⟩, ⟨intensity⟩, ⟨velocity⟩, ⟨connective⟩, ⟨object⟩,
⟨category⟩, ⟨pose⟩); every marker used by a phrase must have a filler
rule, and every reachable (family, direction label) pair must have at least
one verb. Both are checked at load time, never at render time.

Subject selection measures each joint's start-to-end displacement over the
code's interval; if one joint contributes at least the threshold share of
the total it becomes the subject, otherwise the joints are described
mutually ("each other"). Pose injection picks static posecode descriptions
of a motion's start/end state with a greedy weighted set cover that favors
candidates covering many target joints with few irrelevant ones.
"""

import re
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .aggregate import RELATION_SIMULTANEOUS, counterpart_of
from .motioncodes import DIRECTION_LABELS, PROXIMITY, SPATIAL_RELATION
from .posecodes import ANGLE, DISTANCE, IGNORED, PITCH_ROLL, RELATIVE_POSITION
from .skeleton import DEFAULT_SKELETON, display_name, plural_name

SLOT_MARKERS = ("⟨subject⟩", "⟨verb⟩", "⟨intensity⟩", "⟨velocity⟩",
                "⟨connective⟩", "⟨object⟩", "⟨category⟩", "⟨pose⟩")

TWO_JOINT_FAMILIES = (PROXIMITY, SPATIAL_RELATION)
INJECTABLE_KINDS = (ANGLE, DISTANCE, RELATIVE_POSITION, PITCH_ROLL)


class TemplateError(ValueError):
    """Invalid or incomplete template library."""


@dataclass(frozen=True)
class TemplateLibrary:
    sections: dict

    @staticmethod
    def parse(text):
        sections = {}
        current = None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("[") and line.endswith("]"):
                current = line[1:-1].strip()
                sections.setdefault(current, [])
            elif current is None:
                raise TemplateError(f"line {lineno}: phrase outside any [section]")
            else:
                sections[current].append(line)
        return TemplateLibrary(sections=sections).validate()

    @staticmethod
    def load(path=None):
        if path is None:
            text = resources.files("motiontext").joinpath("data/templates.txt").read_text("utf-8")
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        return TemplateLibrary.parse(text)

    def validate(self):
        for (family, _axis), labels in DIRECTION_LABELS.items():
            for label in labels:
                section = f"verbs.{family}.{label}"
                if not self.sections.get(section):
                    raise TemplateError(f"no verbs for reachable label combination [{section}]")
                if family in TWO_JOINT_FAMILIES:
                    if not all("⟨object⟩" in p for p in self.sections[section]):
                        raise TemplateError(f"[{section}] phrases must carry the ⟨object⟩ slot")
                    mutual = f"verbs.{family}.{label}.mutual"
                    if not self.sections.get(mutual):
                        raise TemplateError(f"no mutual verbs for [{mutual}]")
        for name in ("skeleton.main", "transition.pose-to-motion", "transition.motion-to-pose",
                     "connective.simultaneous", "connective.immediately-after",
                     "connective.few-seconds-later", "connective.a-moment-before",
                     "intensity.slight", "intensity.significant",
                     "velocity.very slow", "velocity.slow", "velocity.fast", "velocity.very fast",
                     "pose.angle", "pose.distance", "pose.relative-position", "pose.pitch-roll"):
            if not self.sections.get(name):
                raise TemplateError(f"missing template section [{name}]")
        known = set(SLOT_MARKERS)
        for section, phrases in self.sections.items():
            for phrase in phrases:
                for marker in re.findall(r"⟨[^⟩]*⟩", phrase):
                    if marker not in known:
                        raise TemplateError(f"[{section}]: unknown slot marker {marker}")
        return self

    def pick(self, rng, section):
        phrases = self.sections.get(section)
        if not phrases:
            raise TemplateError(f"missing template section [{section}]")
        return phrases[int(rng.integers(len(phrases)))]

    def first(self, section):
        phrases = self.sections.get(section)
        if not phrases:
            raise TemplateError(f"missing template section [{section}]")
        return phrases[0]


################################################################################
## SUBJECT SELECTION
################################################################################

@dataclass(frozen=True)
class SubjectChoice:
    mode: str                 # "single-joint" | "mutual"
    joint: str = None
    share: float = 0.5


def subject_from_displacements(d_a, d_b, threshold=0.6, joint_a=None, joint_b=None):
    """Pick the subject from two joints' displacement magnitudes."""
    total = d_a + d_b
    if total <= 0:
        return SubjectChoice(mode="mutual", share=0.5)
    share = max(d_a, d_b) / total
    if share >= threshold:
        winner = joint_a if d_a >= d_b else joint_b
        return SubjectChoice(mode="single-joint", joint=winner, share=share)
    return SubjectChoice(mode="mutual", share=share)


def select_subject(code, seq, threshold=0.6, skeleton=DEFAULT_SKELETON):
    """Subject of a two-joint motioncode from per-joint displacement over its interval."""
    if code.family not in TWO_JOINT_FAMILIES or len(code.instance.joints) != 2:
        raise ValueError("select_subject applies to two-joint proximity/spatial-relation codes")
    a, b = code.instance.joints
    pos = seq.frames
    d_a = float(np.linalg.norm(pos[code.T_e, skeleton.index(a)] - pos[code.T_s, skeleton.index(a)]))
    d_b = float(np.linalg.norm(pos[code.T_e, skeleton.index(b)] - pos[code.T_s, skeleton.index(b)]))
    return subject_from_displacements(d_a, d_b, threshold, a, b)


################################################################################
## POSE INJECTION (weighted set cover)
################################################################################

@dataclass(frozen=True)
class PoseCandidate:
    description: str
    joints: frozenset
    weight: float


def greedy_weighted_cover(targets, candidates):
    """Greedy weighted set cover over the target joints.

    Repeatedly picks the candidate with the best newly-covered/weight ratio
    until every coverable target is covered or no candidate helps. Returns
    (chosen candidates, uncovered targets).
    """
    targets = set(targets)
    uncovered = set(targets)
    remaining = list(candidates)
    chosen = []
    while uncovered:
        best, best_ratio, best_idx = None, 0.0, None
        for idx, cand in enumerate(remaining):
            new = len(uncovered & cand.joints)
            if new == 0:
                continue
            ratio = new / cand.weight
            if best is None or ratio > best_ratio + 1e-12:
                best, best_ratio, best_idx = cand, ratio, idx
        if best is None:
            break
        chosen.append(best)
        uncovered -= best.joints
        remaining.pop(best_idx)
    return chosen, uncovered


def choose_pose_injection(code, eligible):
    """Select pose descriptions covering the code's joints (greedy set cover)."""
    targets = set(code.instance.subject_joints)
    chosen, uncovered = greedy_weighted_cover(targets, eligible)
    return [c.description for c in chosen], uncovered


def _pose_category_phrase(kind_name, axis, category_name):
    if kind_name == DISTANCE:
        return {
            "close": "close together",
            "shoulder width": "about shoulder width apart",
            "spread": "spread apart",
            "wide apart": "wide apart",
        }[category_name]
    if kind_name == RELATIVE_POSITION:
        return {
            "left of": "to the left of",
            "right of": "to the right of",
        }.get(category_name, category_name)
    return category_name


def pose_description(instance, category_name, templates, both_sides=False):
    """Static description of one posecode state, e.g. 'the left elbow is straight'."""
    kind = instance.kind.name
    template = templates.first(f"pose.{kind}")
    if kind == ANGLE:
        subject = f"the {display_name(instance.joints[1])}"
    elif kind == PITCH_ROLL:
        subject = f"the {instance.label}" if instance.label else f"the {display_name(instance.joints[0])} segment"
    else:
        subject = f"the {display_name(instance.joints[0])}"
    if both_sides:
        base = instance.joints[1] if kind == ANGLE else instance.joints[0]
        subject = "both " + plural_name(base)
    out = template.replace("⟨subject⟩", subject)
    out = out.replace("⟨category⟩", _pose_category_phrase(kind, instance.kind.axis, category_name))
    if "⟨object⟩" in out:
        other = instance.joints[1] if len(instance.joints) > 1 else instance.joints[0]
        out = out.replace("⟨object⟩", f"the {display_name(other)}")
    verb = "are" if (both_sides or "⟨object⟩" in template and kind == DISTANCE) else "is"
    out = out.replace("⟨verb⟩", verb)
    return _tidy(out)


def build_pose_candidates(targets, frame_index, timelines, templates, skeleton=DEFAULT_SKELETON):
    """Injectable pose descriptions of the given frame, weighted for set cover.

    One candidate per injectable instance touching the targets, plus merged
    both-sides candidates when the mirrored instance holds the same category
    at that frame. Candidate weight is 1 + the number of joints it brings in
    beyond the targets.
    """
    targets = set(targets)
    mirror = skeleton.mirror_map()
    by_signature = {(tuple(t.instance.joints), str(t.instance.kind)): t for t in timelines}
    candidates = []
    for timeline in timelines:
        inst = timeline.instance
        if inst.kind.name not in INJECTABLE_KINDS:
            continue
        ordinal = int(timeline.categories[frame_index])
        if timeline.category_names[ordinal] == IGNORED:
            continue
        joints = set(inst.subject_joints)
        if not joints & targets:
            continue
        weight = 1 + len(joints - targets)
        candidates.append(PoseCandidate(
            description=pose_description(inst, timeline.category_names[ordinal], templates),
            joints=frozenset(joints),
            weight=weight,
        ))
        mirrored_key = (tuple(mirror[j] for j in inst.joints), str(inst.kind))
        twin = by_signature.get(mirrored_key)
        if twin is not None and mirrored_key[0] != tuple(inst.joints) and inst.joints[0].startswith("left"):
            if int(twin.categories[frame_index]) == ordinal:
                both_joints = joints | set(twin.instance.subject_joints)
                candidates.append(PoseCandidate(
                    description=pose_description(inst, timeline.category_names[ordinal], templates,
                                                 both_sides=True),
                    joints=frozenset(both_joints),
                    weight=1 + len(both_joints - targets),
                ))
    return candidates


################################################################################
## RENDERING
################################################################################

@dataclass(frozen=True)
class CaptionDocument:
    """Final caption plus the full intermediate trail for auditing."""

    text: str
    sentences: tuple
    injected_posecodes: tuple
    seed: int
    intermediate: dict


_ES_ENDINGS = ("s", "x", "z", "ch", "sh")


def inflect_verb(phrase, plural):
    """Third-person agreement on the first word of a verb phrase."""
    if plural:
        return phrase
    head, _, rest = phrase.partition(" ")
    if head.endswith(_ES_ENDINGS):
        head += "es"
    elif head.endswith("y") and len(head) > 1 and head[-2] not in "aeiou":
        head = head[:-1] + "ies"
    else:
        head += "s"
    return head + (" " + rest if rest else "")


def _tidy(text):
    text = re.sub(r"\s+", " ", text).strip()
    text = re.sub(r"\s+([,.;:])", r"\1", text)
    return text


def _sentence(text):
    text = _tidy(text)
    if not text:
        return text
    text = text[0].upper() + text[1:]
    if not text.endswith("."):
        text += "."
    return text


def _verb_slots(member, templates, rng, plural):
    """(verb phrase, intensity adverb, velocity adverb) for one member."""
    mutual = counterpart_of(member) == "each other"
    section = f"verbs.{member.family}.{member.direction_label}"
    if mutual:
        section += ".mutual"
    phrase = templates.pick(rng, section)
    phrase = inflect_verb(phrase, plural)
    if "⟨object⟩" in phrase:
        phrase = phrase.replace("⟨object⟩", counterpart_of(member) or "")
    intensity = (templates.pick(rng, f"intensity.{member.intensity_class}")
                 if member.intensity_class in ("slight", "significant") else "")
    velocity = (templates.pick(rng, f"velocity.{member.velocity_class}")
                if member.velocity_class in ("very slow", "slow", "fast", "very fast") else "")
    return _tidy(phrase), intensity, velocity


def _clause_groups(item):
    """Collapse consecutive members with identical labels into one clause."""
    groups = []
    for k, member in enumerate(item.members):
        key = (member.family, member.direction_label, member.intensity_class, member.velocity_class)
        if groups and groups[-1][0] == key and (not item.relation_tags
                                                or item.relation_tags[k - 1] == RELATION_SIMULTANEOUS):
            groups[-1][2] = k
        else:
            groups.append([key, k, k])
    return [(item.members[start], (item.relation_tags[start - 1] if start > 0 else None))
            for _, start, _ in groups]


def render_item(item, templates, rng, lead=""):
    """One sentence body (no pose injection) for an aggregated motion."""
    plural = item.subject_plural
    pronoun = "they" if plural else "it"
    groups = _clause_groups(item)
    body = templates.pick(rng, "skeleton.main")
    verb, intensity, velocity = _verb_slots(groups[0][0], templates, rng, plural)
    body = (body
            .replace("⟨connective⟩", lead + (" " if lead else ""))
            .replace("⟨subject⟩", item.subject_phrase)
            .replace("⟨verb⟩", verb)
            .replace("⟨intensity⟩", intensity)
            .replace("⟨velocity⟩", velocity))
    parts = [_tidy(body)]
    for member, tag in groups[1:]:
        verb, intensity, velocity = _verb_slots(member, templates, rng, plural)
        vp = _tidy(" ".join(filter(None, (verb, intensity, velocity))))
        if tag == RELATION_SIMULTANEOUS or tag is None:
            parts[-1] = parts[-1] + " and " + vp
        else:
            connective = templates.pick(rng, f"connective.{tag}")
            parts.append(f"{connective} {pronoun} {vp}")
    return "; ".join(parts)


def render_caption(ordered_items, injections, templates, rng, seed=0):
    """Assemble the final caption text from ordered items and injections.

    `injections` maps item index -> dict with optional "start"/"end" lists of
    pose description strings. Returns (sentences, text, injected descriptions).
    """
    sentences = []
    injected = []
    for idx, item in enumerate(ordered_items):
        inj = injections.get(idx, {})
        lead = templates.pick(rng, f"connective.{item.lead_tag}") if item.lead_tag else ""
        if inj.get("start"):
            # the lead connective moves onto the pose sentence so it does not
            # pile up with the pose-to-motion transition
            body = render_item(item, templates, rng)
            poses = "; ".join(inj["start"])
            transition = templates.pick(rng, "transition.pose-to-motion")
            sentence = _sentence(f"{lead} {poses}") + " " + _sentence(f"{transition} {body}")
            injected.extend(inj["start"])
        else:
            sentence = _sentence(render_item(item, templates, rng, lead))
        if inj.get("end"):
            poses = "; ".join(inj["end"])
            transition = templates.pick(rng, "transition.motion-to-pose")
            sentence = _tidy(f"{sentence} {_sentence(transition + ' ' + poses)}")
            injected.extend(inj["end"])
        sentences.append(sentence)
    text = " ".join(sentences)
    return sentences, text, injected

import numpy as np
import pytest

from motiontext.aggregate import singleton
from motiontext.motioncodes import PROXIMITY
from motiontext.posecodes import NO_NOISE, default_instances, extract_posecode_timelines
from motiontext.textgen import (PoseCandidate, SubjectChoice, TemplateError,
                                TemplateLibrary, build_pose_candidates,
                                choose_pose_injection, greedy_weighted_cover,
                                inflect_verb, pose_description, render_caption,
                                select_subject, subject_from_displacements)

from conftest import jidx, make_seq, set_elbow_angle, tpose_frames
from oracles import brute_force_cover
from test_aggregate import make_code


class TestTemplates:
    def test_default_library_loads(self):
        lib = TemplateLibrary.load()
        assert lib.sections["verbs.angular.bending"]

    def test_missing_verb_fails_at_load(self):
        text = "[skeleton.main]\n⟨subject⟩ ⟨verb⟩\n"
        with pytest.raises(TemplateError, match="verbs"):
            TemplateLibrary.parse(text)

    def test_unknown_marker_rejected(self):
        lib = TemplateLibrary.load()
        text = "\n".join(f"[{name}]\n" + "\n".join(phrases)
                         for name, phrases in lib.sections.items())
        text += "\n[verbs.angular.bending]\nbend ⟨mystery⟩\n"
        with pytest.raises(TemplateError, match="unknown slot marker"):
            TemplateLibrary.parse(text)

    def test_phrase_outside_section_rejected(self):
        with pytest.raises(TemplateError, match="outside"):
            TemplateLibrary.parse("bend\n")

    def test_pick_is_seed_deterministic(self):
        lib = TemplateLibrary.load()
        a = [lib.pick(np.random.default_rng(3), "verbs.angular.bending") for _ in range(5)]
        b = [lib.pick(np.random.default_rng(3), "verbs.angular.bending") for _ in range(5)]
        assert a == b


class TestInflection:
    @pytest.mark.parametrize("phrase,expected", [
        ("bend", "bends"),
        ("move away from ⟨object⟩", "moves away from ⟨object⟩"),
        ("flex", "flexes"),
        ("cross from the right", "crosses from the right"),
        ("carry on", "carries on"),
    ])
    def test_singular(self, phrase, expected):
        assert inflect_verb(phrase, plural=False) == expected

    def test_plural_unchanged(self):
        assert inflect_verb("bend", plural=True) == "bend"


class TestSubjectSelection:
    def test_worked_threshold_values(self):
        choice = subject_from_displacements(0.7, 0.3, 0.6, "a", "b")
        assert choice.mode == "single-joint" and choice.joint == "a"
        assert abs(choice.share - 0.7) < 1e-12
        choice = subject_from_displacements(0.5, 0.5, 0.6, "a", "b")
        assert choice.mode == "mutual" and abs(choice.share - 0.5) < 1e-12

    def test_degenerate_split(self):
        choice = subject_from_displacements(1.0, 0.0, 0.6, "left_hand", "right_hand")
        assert choice.mode == "single-joint"
        assert choice.joint == "left_hand"
        assert choice.share == 1.0

    def test_zero_motion_is_mutual(self):
        choice = subject_from_displacements(0.0, 0.0, 0.6)
        assert choice.mode == "mutual" and choice.share == 0.5

    def test_scale_invariance(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            d_a, d_b = rng.random(2)
            for scale in (0.1, 3.0, 1e4):
                base = subject_from_displacements(d_a, d_b, 0.6, "a", "b")
                scaled = subject_from_displacements(scale * d_a, scale * d_b, 0.6, "a", "b")
                assert (base.mode, base.joint) == (scaled.mode, scaled.joint)

    def test_select_subject_from_sequence(self):
        frames = tpose_frames(10)
        frames[9, jidx("left_wrist")] += np.array([0.0, 1.0, 0.0])
        seq = make_seq(frames, normalized=True)
        code = make_code(kind="distance", joints=("left_wrist", "right_wrist"),
                         family=PROXIMITY, direction="spreading", m_s=2, t_s=0, t_e=9)
        choice = select_subject(code, seq, threshold=0.6)
        assert choice.mode == "single-joint" and choice.joint == "left_wrist"
        assert choice.share == 1.0


def cand(desc, joints, weight):
    return PoseCandidate(description=desc, joints=frozenset(joints), weight=weight)


class TestSetCover:
    def test_exact_single_candidate(self):
        code = make_code()
        chosen, uncovered = choose_pose_injection(
            code, [cand("the left elbow extends completely", {"left_elbow"}, 1)])
        assert chosen == ["the left elbow extends completely"]
        assert not uncovered

    def test_wider_candidate_still_selected(self):
        code = make_code()
        chosen, uncovered = choose_pose_injection(
            code, [cand("both elbows bend completely", {"left_elbow", "right_elbow"}, 2)])
        assert chosen == ["both elbows bend completely"]
        assert not uncovered

    def test_empty_eligible_reports_all_targets(self):
        code = make_code()
        chosen, uncovered = choose_pose_injection(code, [])
        assert chosen == []
        assert uncovered == {"left_elbow"}

    def test_worked_greedy_example(self):
        candidates = [cand("ab", {"a", "b"}, 2), cand("bc", {"b", "c"}, 2),
                      cand("a", {"a"}, 1), cand("c", {"c"}, 1)]
        chosen, uncovered = greedy_weighted_cover({"a", "b", "c"}, candidates)
        assert [c.description for c in chosen] == ["ab", "c"]
        assert not uncovered
        best_weight, _ = brute_force_cover({"a", "b", "c"}, candidates)
        assert sum(c.weight for c in chosen) == best_weight == 3

    def test_random_instances_against_brute_force(self):
        rng = np.random.default_rng(4)
        harmonic = lambda n: sum(1.0 / k for k in range(1, n + 1)) if n else 1.0
        for _ in range(150):
            n_targets = int(rng.integers(1, 9))
            targets = {f"j{i}" for i in range(n_targets)}
            n_cands = int(rng.integers(0, 11))
            candidates = []
            for c in range(n_cands):
                size = int(rng.integers(1, n_targets + 2))
                joints = set(rng.choice(sorted(targets) + ["extra1", "extra2"],
                                        size=size, replace=False))
                weight = 1 + len(joints - targets)
                candidates.append(cand(f"c{c}", joints, weight))
            chosen, uncovered = greedy_weighted_cover(targets, candidates)
            coverable = targets & set().union(*(c.joints for c in candidates)) if candidates else set()
            covered = set().union(*(c.joints for c in chosen)) if chosen else set()
            assert coverable <= covered            # covers every coverable target
            assert uncovered == targets - covered
            best_weight, _ = brute_force_cover(targets, candidates)
            if coverable:
                greedy_weight = sum(c.weight for c in chosen)
                assert greedy_weight <= harmonic(len(targets)) * best_weight + 1e-9


class TestPoseDescriptions:
    def test_angle_description(self):
        frames = tpose_frames(4)
        for t in range(4):
            set_elbow_angle(frames, t, "left", 30.0)
        seq = make_seq(frames, normalized=True)
        timelines = extract_posecode_timelines(seq, default_instances(), NO_NOISE)
        lib = TemplateLibrary.load()
        angle_tl = next(t for t in timelines
                        if t.instance.kind.name == "angle" and "left_elbow" in t.instance.joints)
        desc = pose_description(angle_tl.instance,
                                angle_tl.category_names[angle_tl.categories[0]], lib)
        assert desc == "the left elbow is completely bent"

    def test_both_sides_candidate_built(self):
        frames = tpose_frames(4)
        for t in range(4):
            set_elbow_angle(frames, t, "left", 30.0)
            set_elbow_angle(frames, t, "right", 30.0)
        seq = make_seq(frames, normalized=True)
        timelines = extract_posecode_timelines(seq, default_instances(), NO_NOISE)
        lib = TemplateLibrary.load()
        cands = build_pose_candidates({"left_elbow"}, 0, timelines, lib)
        both = [c for c in cands if c.description.startswith("both elbows")]
        assert both
        assert both[0].joints == frozenset({"left_elbow", "right_elbow"})
        assert both[0].weight == 2  # one irrelevant joint introduced


class TestRendering:
    def test_single_code_sentence(self):
        lib = TemplateLibrary.load()
        item = singleton(make_code(bin=0))
        item.lead_tag = None
        sentences, text, injected = render_caption(
            [item], {}, lib, np.random.default_rng(0))
        assert len(sentences) == 1
        assert "left elbow" in text
        assert text.endswith(".")
        assert text[0].isupper()
        assert not injected

    def test_injection_blended(self):
        lib = TemplateLibrary.load()
        item = singleton(make_code(bin=0))
        item.lead_tag = None
        injections = {0: {"start": ["the left elbow is straight"]}}
        sentences, text, injected = render_caption([item], injections, lib,
                                                   np.random.default_rng(1))
        assert "the left elbow is straight" in text.lower()
        assert injected == ["the left elbow is straight"]

    def test_empty_items_empty_caption(self):
        lib = TemplateLibrary.load()
        sentences, text, injected = render_caption([], {}, lib, np.random.default_rng(0))
        assert sentences == [] and text == "" and injected == []

    def test_seed_determinism_and_variation(self):
        lib = TemplateLibrary.load()

        def run(seed):
            item = singleton(make_code(bin=0))
            item.lead_tag = None
            return render_caption([item], {}, lib, np.random.default_rng(seed))[1]

        assert run(5) == run(5)
        texts = {run(s) for s in range(8)}
        assert len(texts) > 1  # surface words vary across seeds

    def test_mutual_subject_each_other(self):
        lib = TemplateLibrary.load()
        code = make_code(kind="distance", joints=("left_wrist", "right_wrist"),
                         family=PROXIMITY, direction="spreading", m_s=3, bin=0,
                         subject=SubjectChoice("mutual", None, 0.5))
        item = singleton(code)
        item.lead_tag = None
        _, text, _ = render_caption([item], {}, lib, np.random.default_rng(2))
        assert "each other" in text or "one another" in text
        assert "left wrist and the right wrist" in text

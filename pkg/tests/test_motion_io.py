import json
import math

import numpy as np
import pytest

from motiontext.motion_io import (MotionFileError, MotionSequence, mirror_sequence,
                                  normalize_sequence, parse_motion_file,
                                  sequence_to_csv, sequence_to_json)
from motiontext.skeleton import JOINT_NAMES, T_POSE

from conftest import jidx, make_seq, tpose_frames


def tpose_json(n=2, fps=20.0, **extra):
    doc = {"fps": fps, "joints": list(JOINT_NAMES),
           "frames": [[list(T_POSE[j]) for j in JOINT_NAMES] for _ in range(n)]}
    doc.update(extra)
    return json.dumps(doc)


class TestParse:
    def test_tpose_roundtrip(self):
        seq = parse_motion_file(tpose_json().encode(), "canonical-json")
        assert seq.n_frames == 2
        assert seq.fps == 20.0
        assert not seq.normalized
        assert np.allclose(seq.joint("left_wrist")[0], T_POSE["left_wrist"])

    def test_wrong_joint_count(self):
        doc = json.loads(tpose_json())
        doc["joints"] = doc["joints"][:21]
        with pytest.raises(MotionFileError, match="joint count 21 ≠ 22"):
            parse_motion_file(json.dumps(doc), "canonical-json")

    def test_frame_with_wrong_joint_count(self):
        doc = json.loads(tpose_json())
        doc["frames"][1] = doc["frames"][1][:21]
        with pytest.raises(MotionFileError, match="frame 1"):
            parse_motion_file(json.dumps(doc), "canonical-json")

    def test_zero_fps(self):
        with pytest.raises(MotionFileError, match="fps must be positive"):
            parse_motion_file(tpose_json(fps=0), "canonical-json")

    def test_non_finite_coordinate(self):
        doc = json.loads(tpose_json())
        doc["frames"][1][3][0] = float("nan")
        text = json.dumps(doc).replace("NaN", "NaN")
        with pytest.raises((MotionFileError, ValueError)):
            parse_motion_file(text, "canonical-json")

    def test_unit_scale(self):
        doc = json.loads(tpose_json())
        doc["unit_scale"] = 0.001
        doc["frames"] = (np.asarray(doc["frames"]) * 1000.0).tolist()
        seq = parse_motion_file(json.dumps(doc), "canonical-json")
        assert np.allclose(seq.joint("head")[0], T_POSE["head"])

    def test_malformed_json(self):
        with pytest.raises(MotionFileError, match="malformed JSON"):
            parse_motion_file(b"{not json", "canonical-json")

    def test_single_frame_rejected(self):
        with pytest.raises(MotionFileError, match="at least 2 frames"):
            parse_motion_file(tpose_json(n=1), "canonical-json")

    def test_csv_roundtrip(self):
        seq = make_seq(tpose_frames(3), fps=30.0)
        text = sequence_to_csv(seq)
        back = parse_motion_file(text, "flat-csv", fps=30.0)
        assert back.n_frames == 3
        assert np.array_equal(back.frames, seq.frames)

    def test_csv_out_of_order(self):
        seq = make_seq(tpose_frames(2))
        lines = sequence_to_csv(seq).splitlines()
        lines[1], lines[2] = lines[2], lines[1]
        with pytest.raises(MotionFileError, match="out of order"):
            parse_motion_file("\n".join(lines), "flat-csv")

    def test_json_roundtrip(self):
        seq = make_seq(tpose_frames(2), fps=25.0)
        back = parse_motion_file(sequence_to_json(seq), "canonical-json")
        assert back.fps == 25.0
        assert np.array_equal(back.frames, seq.frames)


def rotate_y(frames, deg):
    theta = math.radians(deg)
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    return frames @ rot.T


class TestNormalize:
    def test_idempotent_bit_exact(self):
        frames = tpose_frames(3) + np.array([1.0, 0.0, -2.0])
        once = normalize_sequence(make_seq(frames))
        twice = normalize_sequence(once)
        assert twice is once

    def test_root_at_origin_facing_forward(self):
        frames = rotate_y(tpose_frames(3), 90.0) + np.array([3.0, 0.0, -2.0])
        out = normalize_sequence(make_seq(frames))
        root0 = out.frames[0, jidx("pelvis")]
        assert abs(root0[0]) < 1e-12 and abs(root0[2]) < 1e-12
        assert abs(root0[1] - T_POSE["pelvis"][1]) < 1e-12  # height preserved
        hip = out.frames[0, jidx("left_hip")] - out.frames[0, jidx("right_hip")]
        assert hip[0] > 0 and abs(hip[2]) < 1e-9  # left hip on +x

    def test_pre_rotated_input_matches_plain_normalization(self):
        base = tpose_frames(2)
        base[1, jidx("left_wrist")] += np.array([0.1, 0.2, 0.3])
        plain = normalize_sequence(make_seq(base))
        moved = rotate_y(base, 90.0) + np.array([3.0, 0.0, -2.0])
        recovered = normalize_sequence(make_seq(moved))
        assert np.max(np.abs(recovered.frames - plain.frames)) < 1e-9

    @pytest.mark.parametrize("deg,shift", [(37.0, (0.5, 0.0, 9.0)), (-140.0, (-4.0, 0.0, 2.5)),
                                           (183.0, (0.0, 0.0, 0.0))])
    def test_rigid_invariance(self, deg, shift):
        base = tpose_frames(3)
        base[2, jidx("right_wrist")] += np.array([0.0, -0.4, 0.2])
        plain = normalize_sequence(make_seq(base))
        moved = rotate_y(base, deg) + np.asarray(shift)
        out = normalize_sequence(make_seq(moved))
        assert np.max(np.abs(out.frames - plain.frames)) < 1e-9

    def test_pairwise_distances_preserved(self):
        rng = np.random.default_rng(3)
        frames = tpose_frames(4) + 0.05 * rng.standard_normal((4, 22, 3))
        seq = make_seq(rotate_y(frames, 55.0) + np.array([1.0, 0.0, 2.0]))
        out = normalize_sequence(seq)
        for t in range(4):
            before = np.linalg.norm(seq.frames[t, :, None] - seq.frames[t, None, :], axis=-1)
            after = np.linalg.norm(out.frames[t, :, None] - out.frames[t, None, :], axis=-1)
            assert np.max(np.abs(before - after)) < 1e-9

    def test_coincident_hips_falls_back_with_warning(self):
        frames = tpose_frames(2)
        frames[0, jidx("left_hip")] = frames[0, jidx("right_hip")]
        frames += np.array([2.0, 0.0, 1.0])
        with pytest.warns(UserWarning, match="hips coincide"):
            out = normalize_sequence(make_seq(frames))
        assert out.normalized
        # only the root translation was applied
        expected = frames - np.array([2.0, 0.0, 1.0])
        assert np.max(np.abs(out.frames - expected)) < 1e-12


class TestMirror:
    def test_involution(self):
        rng = np.random.default_rng(11)
        frames = tpose_frames(3) + 0.03 * rng.standard_normal((3, 22, 3))
        seq = normalize_sequence(make_seq(frames))
        assert np.array_equal(mirror_sequence(mirror_sequence(seq)).frames, seq.frames)

    def test_left_wrist_lands_on_right(self):
        frames = tpose_frames(2)
        frames[1, jidx("left_wrist")] = [0.5, 1.0, 0.2]
        seq = make_seq(frames, normalized=True)
        out = mirror_sequence(seq)
        assert np.allclose(out.frames[1, jidx("right_wrist")], [-0.5, 1.0, 0.2])

    def test_symmetric_tpose_is_fixed_point(self):
        seq = make_seq(tpose_frames(2), normalized=True)
        out = mirror_sequence(seq)
        assert np.allclose(out.frames, seq.frames)

    def test_requires_normalized(self):
        with pytest.raises(ValueError, match="normalized"):
            mirror_sequence(make_seq(tpose_frames(2)))


class TestSequenceValidation:
    def test_shape_checked(self):
        with pytest.raises(MotionFileError, match="shape"):
            MotionSequence(fps=20.0, frames=np.zeros((3, 21, 3)))

    def test_nan_checked(self):
        frames = tpose_frames(2)
        frames[1, 5, 2] = np.inf
        with pytest.raises(MotionFileError, match="non-finite"):
            MotionSequence(fps=20.0, frames=frames)

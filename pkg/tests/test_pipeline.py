import json
import re

import numpy as np
import pytest

from motiontext.cli import main as cli_main
from motiontext.motion_io import sequence_to_csv, sequence_to_json
from motiontext.pipeline import (ConfigError, PipelineConfig, caption_sequence,
                                 dump_to_json, run_pipeline, stats_from_corpus)
from motiontext.skeleton import JOINT_NAMES, display_name

from conftest import jidx, make_seq, set_elbow_angle, tpose_frames


def curl_frames(n=60, side="right", start=179.0, end=41.0):
    frames = tpose_frames(n)
    for t in range(n):
        set_elbow_angle(frames, t, side, start + (end - start) * t / (n - 1))
    return frames


def write_motion(tmp_path, name, frames, fps=60.0):
    path = tmp_path / name
    path.write_text(sequence_to_json(make_seq(frames, fps=fps)), encoding="utf-8")
    return path


class TestCaptionSequence:
    def test_deterministic_under_seed(self):
        seq = make_seq(curl_frames(), fps=60.0)
        cfg = PipelineConfig.defaults(seed=11)
        a = caption_sequence(seq, cfg)
        b = caption_sequence(seq, cfg)
        assert a.text == b.text
        assert dump_to_json(a) == dump_to_json(b)

    def test_different_caption_index_differs(self):
        seq = make_seq(curl_frames(), fps=60.0)
        cfg = PipelineConfig.defaults(seed=11)
        a = caption_sequence(seq, cfg, caption_index=0)
        b = caption_sequence(seq, cfg, caption_index=1)
        assert dump_to_json(a) != dump_to_json(b)

    def test_no_noise_stable_across_seeds_at_code_level(self):
        seq = make_seq(curl_frames(), fps=60.0)
        cfg = PipelineConfig.defaults(noise_enabled=False)
        a = caption_sequence(seq, cfg, seed=1)
        b = caption_sequence(seq, cfg, seed=2)
        assert a.intermediate["motioncodes"] == b.intermediate["motioncodes"]

    def test_static_sequence_has_marker(self):
        seq = make_seq(tpose_frames(20), fps=20.0)
        doc = caption_sequence(seq, PipelineConfig.defaults(noise_enabled=False))
        assert doc.text == ""
        assert doc.intermediate["marker"] == "no salient motion"

    def test_faithfulness_every_mentioned_joint_is_supported(self):
        from motiontext.skeleton import plural_name
        rng = np.random.default_rng(3)
        for trial in range(6):
            frames = tpose_frames(50)
            for t in range(50):
                set_elbow_angle(frames, t, "right", 179.0 - 2.5 * t)
                frames[t, jidx("left_wrist")] += 0.01 * t * rng.random(3)
            seq = make_seq(frames, fps=25.0)
            doc = caption_sequence(seq, PipelineConfig.defaults(), seed=trial)
            supported = set()
            for item in doc.intermediate["aggregation"]:
                for member in item["members"]:
                    supported.update(member["instance"]["joints"])
            injected_text = " ".join(doc.injected_posecodes)
            for joint in JOINT_NAMES:
                if (re.search(rf"\b{display_name(joint)}\b", injected_text)
                        or re.search(rf"\bboth {plural_name(joint)}\b", injected_text)):
                    supported.add(joint)
            mentioned = set()
            for joint in JOINT_NAMES:
                phrase = display_name(joint)
                if phrase != "body" and re.search(rf"\b{phrase}\b", doc.text):
                    mentioned.add(joint)
            assert mentioned <= supported, (doc.text, mentioned - supported)

    def test_intermediate_dump_is_json_stable(self):
        seq = make_seq(curl_frames(), fps=60.0)
        doc = caption_sequence(seq, PipelineConfig.defaults(), seed=0)
        parsed = json.loads(dump_to_json(doc))
        assert parsed["text"] == doc.text
        assert parsed["motioncodes"]

    def test_every_aggregated_item_yields_one_sentence(self):
        seq = make_seq(curl_frames(), fps=60.0)
        for seed in range(5):
            doc = caption_sequence(seq, PipelineConfig.defaults(), seed=seed)
            assert len(doc.sentences) == len(doc.intermediate["aggregation"])


class TestRunPipeline:
    def test_batch_outputs_and_determinism(self, tmp_path):
        a = write_motion(tmp_path, "curl.json", curl_frames())
        cfg = PipelineConfig.defaults(seed=7, captions_per_motion=3, emit_intermediate=True)
        out1, out2 = tmp_path / "run1", tmp_path / "run2"
        r1 = run_pipeline(cfg, [str(a)], output_dir=out1)
        r2 = run_pipeline(cfg, [str(a)], output_dir=out2)
        assert r1.exit_code == r2.exit_code == 0
        files1 = sorted(p.name for p in out1.iterdir())
        assert files1 == ["curl.1.dump", "curl.1.txt", "curl.2.dump", "curl.2.txt",
                          "curl.3.dump", "curl.3.txt"]
        for name in files1:
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_second_input_malformed_is_isolated(self, tmp_path):
        good = write_motion(tmp_path, "good.json", curl_frames())
        bad = tmp_path / "bad.json"
        bad.write_text("{broken", encoding="utf-8")
        out = tmp_path / "out"
        result = run_pipeline(PipelineConfig.defaults(), [str(good), str(bad)], output_dir=out)
        assert result.exit_code == 1
        assert (out / "good.1.txt").exists()
        report = json.loads((out / "errors.json").read_text())
        assert report["failed"][0]["input"].endswith("bad.json")
        assert report["succeeded"] == [str(good)]

    def test_missing_file_reported(self, tmp_path):
        result = run_pipeline(PipelineConfig.defaults(), [str(tmp_path / "nope.json")],
                              output_dir=tmp_path / "out")
        assert result.exit_code == 1

    def test_csv_format(self, tmp_path):
        seq = make_seq(curl_frames(30), fps=20.0)
        path = tmp_path / "curl.csv"
        path.write_text(sequence_to_csv(seq), encoding="utf-8")
        cfg = PipelineConfig.defaults(input_format="flat-csv", csv_fps=20.0)
        result = run_pipeline(cfg, [str(path)], output_dir=tmp_path / "out")
        assert result.exit_code == 0
        assert (tmp_path / "out" / "curl.1.txt").read_text().strip()


class TestStatsCorpus:
    def test_corpus_mode_flags_low_frequency_combos(self, tmp_path):
        corpus = tmp_path / "corpus"
        corpus.mkdir()
        for k in range(4):
            write_motion(corpus, f"m{k}.json", curl_frames(40 + 4 * k))
        stats = stats_from_corpus(corpus, PipelineConfig.defaults())
        assert stats.frequencies
        assert abs(sum(stats.frequencies.values()) - 1.0) < 1e-9
        assert stats.rare_cutoff is not None

    def test_empty_corpus_rejected(self, tmp_path):
        empty = tmp_path / "corpus"
        empty.mkdir()
        with pytest.raises(ConfigError):
            stats_from_corpus(empty, PipelineConfig.defaults())


class TestConfig:
    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown config key"):
            PipelineConfig.from_dict({"mystery_knob": 3})

    def test_bad_values_rejected(self):
        with pytest.raises(ConfigError):
            PipelineConfig.defaults(captions_per_motion=0)
        with pytest.raises(ConfigError):
            PipelineConfig.defaults(p_rule=1.5)

    def test_file_roundtrip(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"seed": 42, "n_max": 5}), encoding="utf-8")
        cfg = PipelineConfig.from_file(path)
        assert cfg.seed == 42 and cfg.n_max == 5

    def test_defaults_match_packaged_file(self):
        from importlib import resources
        from motiontext.posecodes import default_instance_specs
        doc = json.loads(resources.files("motiontext")
                         .joinpath("data/default_config.json").read_text("utf-8"))
        assert doc["instance_specs"] == default_instance_specs()
        cfg = PipelineConfig.defaults()
        assert cfg.subject_threshold == 0.6
        assert cfg.t_range_bins == 2
        assert cfg.p_rule == 0.75
        assert cfg.n_max == 8


class TestCli:
    def test_end_to_end_exit_codes(self, tmp_path, capsys):
        good = write_motion(tmp_path, "curl.json", curl_frames())
        out = tmp_path / "caps"
        code = cli_main([str(good), "--seed", "7", "--out", str(out),
                         "--captions-per-motion", "2", "--emit-intermediate"])
        assert code == 0
        assert (out / "curl.1.txt").exists() and (out / "curl.2.dump").exists()

    def test_no_noise_seed_repeatable_tree(self, tmp_path):
        good = write_motion(tmp_path, "curl.json", curl_frames())
        outs = []
        for run in ("a", "b"):
            out = tmp_path / run
            assert cli_main([str(good), "--no-noise", "--seed", "7", "--out", str(out),
                             "--emit-intermediate"]) == 0
            outs.append({p.name: p.read_bytes() for p in out.iterdir()})
        assert outs[0] == outs[1]

    def test_partial_failure_exit_one(self, tmp_path, capsys):
        good = write_motion(tmp_path, "curl.json", curl_frames())
        bad = tmp_path / "bad.json"
        bad.write_text("nope", encoding="utf-8")
        code = cli_main([str(good), str(bad), "--out", str(tmp_path / "caps")])
        assert code == 1

    def test_config_error_exit_two(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"p_rule": 9}), encoding="utf-8")
        good = write_motion(tmp_path, "curl.json", curl_frames())
        assert cli_main([str(good), "--config", str(cfg), "--out", str(tmp_path / "caps")]) == 2

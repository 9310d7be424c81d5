"""End-to-end captioning: configuration, seeding, and the stage driver.

Every caption is produced by a deterministic function of (sequence, config,
master seed, input index, caption index). The master seed is expanded per
caption into independent streams for posecode noise, velocity-edge noise,
aggregation rule draws, template picks, and injection draws, so outputs are
stable no matter how work is scheduled.
"""

import json
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import aggregate as agg
from . import motioncodes as mc
from . import posecodes as pc
from . import textgen as tg
from .motion_io import MotionFileError, normalize_sequence, parse_motion_file
from .skeleton import DEFAULT_SKELETON


class ConfigError(ValueError):
    """Invalid pipeline configuration."""


@dataclass(frozen=True)
class PipelineConfig:
    """All pipeline knobs; see data/default_config.json for the file schema."""

    seed: int = 0
    noise_enabled: bool = True
    angle_sigma_deg: float = 2.0
    distance_sigma_m: float = 0.01
    thresholds: pc.Thresholds = field(default_factory=pc.Thresholds)
    instance_specs: tuple = None            # None -> default set
    min_run_frames: int = 3
    min_transitions: int = 1
    max_gap_seconds: float = 0.25
    intensity_edges: tuple = (1, 2, 3)
    velocity_edges_per_second: tuple = (0.5, 1.5, 3.0, 6.0)
    velocity_edge_noise_frac: float = 0.10
    n_max: int = 8
    t_w_seconds: float = 0.5
    t_range_bins: int = 2
    p_rule: float = 0.75
    subject_threshold: float = 0.6
    inject_start_prob: float = 0.5
    inject_end_prob: float = 0.3
    rare_patterns: tuple = None             # None -> default rare set
    captions_per_motion: int = 1
    emit_intermediate: bool = False
    template_path: str = None
    stats_corpus: str = None
    input_format: str = "canonical-json"
    csv_fps: float = 20.0

    def validate(self):
        self.thresholds.validate()
        if self.captions_per_motion < 1:
            raise ConfigError("captions_per_motion must be >= 1")
        if self.min_run_frames < 1 or self.min_transitions < 1:
            raise ConfigError("min_run_frames and min_transitions must be >= 1")
        if not 0 <= self.p_rule <= 1:
            raise ConfigError("p_rule must be in [0, 1]")
        if not 0 < self.subject_threshold <= 1:
            raise ConfigError("subject_threshold must be in (0, 1]")
        for name in ("inject_start_prob", "inject_end_prob"):
            if not 0 <= getattr(self, name) <= 1:
                raise ConfigError(f"{name} must be in [0, 1]")
        if list(self.velocity_edges_per_second) != sorted(self.velocity_edges_per_second):
            raise ConfigError("velocity_edges_per_second must be ascending")
        if self.n_max < 1:
            raise ConfigError("n_max must be >= 1")
        if self.t_w_seconds <= 0 or self.max_gap_seconds <= 0:
            raise ConfigError("t_w_seconds and max_gap_seconds must be positive")
        if self.input_format not in ("canonical-json", "flat-csv"):
            raise ConfigError(f"unknown input format '{self.input_format}'")
        self.instances()      # raises on malformed instance specs
        self.templates()      # raises on incomplete template library
        return self

    def instances(self):
        specs = self.instance_specs
        if specs is None:
            specs = pc.default_instance_specs()
        return pc.instances_from_specs(specs)

    def templates(self):
        return tg.TemplateLibrary.load(self.template_path)

    def salience_stats(self):
        if self.rare_patterns is not None:
            return agg.SalienceStats(rare_patterns=tuple(
                tuple(p) for p in self.rare_patterns))
        return agg.SalienceStats.default()

    @staticmethod
    def from_dict(doc, **overrides):
        """Build a config from a JSON-style dict (unknown keys rejected)."""
        known = set(PipelineConfig.__dataclass_fields__)
        data = {}
        for key, value in doc.items():
            if key not in known:
                raise ConfigError(f"unknown config key '{key}'")
            data[key] = value
        data.update(overrides)
        if "thresholds" in data and isinstance(data["thresholds"], dict):
            data["thresholds"] = pc.Thresholds(**{
                k: tuple(v) if isinstance(v, list) else v
                for k, v in data["thresholds"].items()})
        for key in ("intensity_edges", "velocity_edges_per_second", "rare_patterns", "instance_specs"):
            if key in data and isinstance(data[key], list):
                data[key] = tuple(tuple(x) if isinstance(x, list) else x for x in data[key]) \
                    if key != "instance_specs" else tuple(data[key])
        return PipelineConfig(**data).validate()

    @staticmethod
    def from_file(path, **overrides):
        with open(path, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc}") from None
        return PipelineConfig.from_dict(doc, **overrides)

    @staticmethod
    def defaults(**overrides):
        text = resources.files("motiontext").joinpath("data/default_config.json").read_text("utf-8")
        return PipelineConfig.from_dict(json.loads(text), **overrides)


def derive_streams(seed, input_index, caption_index):
    """Independent per-stage streams for one (input, caption) job."""
    ss = np.random.SeedSequence(seed & ((1 << 64) - 1), spawn_key=(input_index, caption_index))
    noise_key, velocity_key, agg_seed, tmpl_seed, inj_seed = (int(x) for x in ss.generate_state(5, np.uint64))
    return {
        "noise": noise_key,
        "velocity": velocity_key,
        "aggregation": np.random.default_rng(agg_seed),
        "templates": np.random.default_rng(tmpl_seed),
        "injection": np.random.default_rng(inj_seed),
    }


def caption_sequence(seq, config=None, seed=None, input_index=0, caption_index=0, stats=None):
    """Caption one motion sequence; the core deterministic routine.

    The sequence is normalized if needed. Returns a CaptionDocument whose
    `intermediate` dump records every stage (posecode timelines, motioncodes,
    selection, bins, aggregation trace, injections, sentences).
    """
    config = (config or PipelineConfig.defaults()).validate()
    seed = config.seed if seed is None else seed
    streams = derive_streams(seed, input_index, caption_index)
    skeleton = DEFAULT_SKELETON
    templates = config.templates()
    stats = stats or config.salience_stats()

    seq = normalize_sequence(seq, skeleton)
    noise = pc.NoiseConfig(angle_sigma=config.angle_sigma_deg,
                           distance_sigma=config.distance_sigma_m,
                           seed=streams["noise"],
                           enabled=config.noise_enabled)
    instances = config.instances()
    timelines = pc.extract_posecode_timelines(seq, instances, noise, config.thresholds, skeleton)

    mc_config = mc.MotioncodeConfig(
        min_run=config.min_run_frames,
        min_transitions=config.min_transitions,
        max_gap_seconds=config.max_gap_seconds,
        intensity_edges=config.intensity_edges,
        velocity_edges_per_second=config.velocity_edges_per_second,
        velocity_edge_noise_frac=config.velocity_edge_noise_frac,
        noise_enabled=config.noise_enabled,
        velocity_seed=streams["velocity"],
    )
    codes = mc.build_motioncodes(timelines, seq, mc_config)
    selected = agg.select_motioncodes(codes, stats, config.n_max)
    selected = [
        c.with_subject(tg.select_subject(c, seq, config.subject_threshold, skeleton))
        if c.family in tg.TWO_JOINT_FAMILIES and len(c.instance.joints) == 2 else c
        for c in selected
    ]

    agg_config = agg.AggregationConfig(t_w_seconds=config.t_w_seconds,
                                       t_range_bins=config.t_range_bins,
                                       p_rule=config.p_rule)
    items = agg.aggregate_all(selected, skeleton, seq.fps, agg_config, streams["aggregation"])

    inj_rng = streams["injection"]
    injections, injection_trace = {}, []
    for idx, item in enumerate(items):
        entry = {}
        draws = (inj_rng.random(), inj_rng.random())
        for slot, prob, frame in (
                ("start", config.inject_start_prob, min(m.T_s for m in item.members)),
                ("end", config.inject_end_prob, max(m.T_e for m in item.members))):
            take = draws[0 if slot == "start" else 1] < prob
            if not take:
                continue
            targets = item.joint_set()
            candidates = tg.build_pose_candidates(targets, frame, timelines,
                                                  templates, skeleton)
            chosen, uncovered = tg.greedy_weighted_cover(targets, candidates)
            if chosen:
                entry[slot] = [c.description for c in chosen]
            injection_trace.append({
                "item": idx, "slot": slot, "frame": int(frame),
                "descriptions": [c.description for c in chosen],
                "uncovered": sorted(uncovered),
            })
        if entry:
            injections[idx] = entry

    sentences, text, injected = tg.render_caption(items, injections, templates,
                                                  streams["templates"], seed)
    intermediate = {
        "seed": seed,
        "input_index": input_index,
        "caption_index": caption_index,
        "fps": seq.fps,
        "n_frames": seq.n_frames,
        "posecodes": [_timeline_dump(t) for t in timelines],
        "motioncodes": [_code_dump(c) for c in codes],
        "selected": [_code_dump(c) for c in selected],
        "aggregation": [_item_dump(it) for it in items],
        "injections": injection_trace,
        "sentences": sentences,
        "text": text,
    }
    if not items:
        intermediate["marker"] = "no salient motion"
    return tg.CaptionDocument(
        text=text,
        sentences=tuple(sentences),
        injected_posecodes=tuple(injected),
        seed=seed,
        intermediate=intermediate,
    )


def _timeline_dump(timeline):
    return {
        "instance": timeline.instance.spec(),
        "instance_index": timeline.instance.index,
        "category_names": list(timeline.category_names),
        "categories": [int(c) for c in timeline.categories],
    }


def _code_dump(code):
    return {
        "family": code.family,
        "instance": code.instance.spec(),
        "instance_index": code.instance.index,
        "T_s": int(code.T_s),
        "T_e": int(code.T_e),
        "M_S": int(code.M_S),
        "M_V": float(code.M_V),
        "velocity_class": code.velocity_class,
        "intensity_class": code.intensity_class,
        "direction_label": code.direction_label,
        "start_category": int(code.start_category),
        "end_category": int(code.end_category),
        "bin": None if code.bin is None else int(code.bin),
        "subject": None if code.subject is None else {
            "mode": code.subject.mode,
            "joint": code.subject.joint,
            "share": float(code.subject.share),
        },
    }


def _item_dump(item):
    return {
        "members": [_code_dump(m) for m in item.members],
        "subject_phrase": item.subject_phrase,
        "subject_key": item.subject_key,
        "subject_plural": item.subject_plural,
        "relation_tags": list(item.relation_tags),
        "rule_trace": list(item.rule_trace),
        "bin_anchor": int(item.bin_anchor),
        "lead_tag": item.lead_tag,
    }


def dump_to_json(document):
    """Stable serialized form of the intermediate dump (golden-test friendly)."""
    return json.dumps(document.intermediate, sort_keys=True, indent=2)


################################################################################
## SALIENCE CORPUS MODE
################################################################################

def stats_from_corpus(directory, config):
    """Recompute salience statistics from a directory of motion files."""
    counts = {}
    paths = sorted(Path(directory).glob("*"))
    files = [p for p in paths if p.is_file()]
    if not files:
        raise ConfigError(f"stats corpus '{directory}' contains no files")
    base = replace(config, noise_enabled=False)
    for path in files:
        seq = parse_motion_file(path.read_bytes(), config.input_format, config.csv_fps)
        seq = normalize_sequence(seq)
        timelines = pc.extract_posecode_timelines(
            seq, base.instances(), pc.NO_NOISE, base.thresholds)
        mc_config = mc.MotioncodeConfig(
            min_run=base.min_run_frames, min_transitions=base.min_transitions,
            max_gap_seconds=base.max_gap_seconds, intensity_edges=base.intensity_edges,
            velocity_edges_per_second=base.velocity_edges_per_second, noise_enabled=False)
        for code in mc.build_motioncodes(timelines, seq, mc_config):
            key = (code.family, code.intensity_class, code.velocity_class)
            counts[key] = counts.get(key, 0) + 1
    return agg.SalienceStats.from_label_counts(counts)


################################################################################
## BATCH DRIVER
################################################################################

@dataclass
class InputResult:
    path: str
    documents: list = field(default_factory=list)
    error: str = None


@dataclass
class PipelineResult:
    results: list
    exit_code: int

    def error_report(self):
        return {
            "failed": [{"input": r.path, "error": r.error} for r in self.results if r.error],
            "succeeded": [r.path for r in self.results if not r.error],
        }


def _process_input(path, index, config, stats):
    result = InputResult(path=str(path))
    try:
        raw = Path(path).read_bytes()
        seq = parse_motion_file(raw, config.input_format, config.csv_fps)
        for k in range(config.captions_per_motion):
            result.documents.append(
                caption_sequence(seq, config, config.seed, index, k, stats))
    except (MotionFileError, OSError, ValueError) as exc:
        result.error = f"{type(exc).__name__}: {exc}"
    except Exception as exc:  # keep one bad input from killing the batch
        result.error = "".join(traceback.format_exception_only(type(exc), exc)).strip()
    return result


def run_pipeline(config, inputs, output_dir=None, max_workers=4):
    """Caption a batch of motion files.

    Each input yields `captions_per_motion` caption files (and dumps when
    `emit_intermediate` is set) named ``<stem>.<k>.txt`` / ``<stem>.<k>.dump``.
    A failing input is reported and skipped without aborting the others.
    Exit code: 0 all good, 1 any input failed.
    """
    config.validate()
    stats = (stats_from_corpus(config.stats_corpus, config)
             if config.stats_corpus else config.salience_stats())
    workers = max(1, min(max_workers, len(inputs) or 1))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(
            lambda pair: _process_input(pair[1], pair[0], config, stats),
            enumerate(inputs)))

    if output_dir is not None:
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        for result in results:
            if result.error:
                continue
            stem = Path(result.path).stem
            for k, doc in enumerate(result.documents, start=1):
                (out / f"{stem}.{k}.txt").write_text(doc.text + "\n", encoding="utf-8")
                if config.emit_intermediate:
                    (out / f"{stem}.{k}.dump").write_text(dump_to_json(doc), encoding="utf-8")
        report = PipelineResult(results, 0).error_report()
        if report["failed"]:
            (out / "errors.json").write_text(json.dumps(report, indent=2), encoding="utf-8")

    exit_code = 1 if any(r.error for r in results) else 0
    return PipelineResult(results=results, exit_code=exit_code)

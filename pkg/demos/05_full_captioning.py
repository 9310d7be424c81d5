"""End to end: files in, captions and audit dumps out.

Writes a small batch of motion files (one of them deliberately broken),
captions them through the same entry point the command-line tool uses, and
shows seed behavior: the same seed reproduces captions byte for byte, and
different seeds re-roll the surface wording while the detected structure
stays put.
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from motiontext import JOINT_NAMES, MotionSequence, T_POSE, sequence_to_json
from motiontext.cli import main as cli_main
from motiontext.pipeline import PipelineConfig, caption_sequence

BASE = np.array([T_POSE[j] for j in JOINT_NAMES])
workdir = Path(tempfile.mkdtemp(prefix="captions-"))


def wave_frames(n=120):
    frames = np.tile(BASE, (n, 1, 1))
    s, e, w = (JOINT_NAMES.index(f"right_{x}") for x in ("shoulder", "elbow", "wrist"))
    for t in range(n):
        deg = 125.0 + 54.0 * np.cos(2 * np.pi * t / 60)
        u = frames[t, e] - frames[t, s]
        u /= np.linalg.norm(u)
        alpha = np.radians(180.0 - deg)
        frames[t, w] = frames[t, e] + 0.27 * (np.cos(alpha) * u + np.sin(alpha) * np.array([0, 1, 0]))
    return frames


(workdir / "wave.json").write_text(sequence_to_json(MotionSequence(fps=30.0, frames=wave_frames())))
(workdir / "broken.json").write_text("{this is not a motion file")

out = workdir / "captions"
code = cli_main([str(workdir / "wave.json"), str(workdir / "broken.json"),
                 "--seed", "11", "--captions-per-motion", "2",
                 "--emit-intermediate", "--out", str(out)])
print(f"\nexit code {code} (1 = partial failure, the broken file was reported)")
print("outputs:", sorted(p.name for p in out.iterdir()))
print("\nfirst caption:")
print(" ", (out / "wave.1.txt").read_text().strip())
print("second caption (same motion, re-rolled wording):")
print(" ", (out / "wave.2.txt").read_text().strip())

report = json.loads((out / "errors.json").read_text())
print("\nerror report:", report["failed"])

# --- seed sweep: structure is stable, surface varies --------------------------
seq = MotionSequence(fps=30.0, frames=wave_frames())
config = PipelineConfig.defaults(noise_enabled=False)
families = None
for seed in range(3):
    doc = caption_sequence(seq, config, seed=seed)
    detected = [(m["family"], m["direction_label"]) for m in doc.intermediate["selected"]]
    if families is None:
        families = detected
    assert detected == families, "noise off: detected structure must not depend on the seed"
    print(f"\nseed {seed}: {doc.text}")
print("\ndetected structure, identical across seeds:", families)

"""Batch captioning command.

Exit codes: 0 all inputs captioned, 1 some input failed (the others are
still written, with an errors.json report), 2 configuration error.
"""

import argparse
import json
import sys

from .pipeline import ConfigError, PipelineConfig, run_pipeline


def build_parser():
    parser = argparse.ArgumentParser(
        prog="motiontext",
        description="Generate natural-language captions for 3D joint-trajectory files.")
    parser.add_argument("inputs", nargs="+", help="motion files to caption")
    parser.add_argument("--config", metavar="FILE", help="JSON config file")
    parser.add_argument("--seed", type=int, metavar="N", help="master seed")
    parser.add_argument("--no-noise", action="store_true", help="disable subjectivity noise")
    parser.add_argument("--captions-per-motion", type=int, metavar="K",
                        help="captions to generate per input")
    parser.add_argument("--emit-intermediate", action="store_true",
                        help="write a .dump audit file next to each caption")
    parser.add_argument("--stats-corpus", metavar="DIR",
                        help="recompute salience statistics from a motion-file directory")
    parser.add_argument("--format", choices=["canonical-json", "flat-csv"],
                        help="input file format (default canonical-json)")
    parser.add_argument("--out", metavar="DIR", default="captions",
                        help="output directory (default ./captions)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.no_noise:
        overrides["noise_enabled"] = False
    if args.captions_per_motion is not None:
        overrides["captions_per_motion"] = args.captions_per_motion
    if args.emit_intermediate:
        overrides["emit_intermediate"] = True
    if args.stats_corpus:
        overrides["stats_corpus"] = args.stats_corpus
    if args.format:
        overrides["input_format"] = args.format
    try:
        if args.config:
            config = PipelineConfig.from_file(args.config, **overrides)
        else:
            config = PipelineConfig.defaults(**overrides)
        result = run_pipeline(config, args.inputs, output_dir=args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    for item in result.results:
        if item.error:
            print(f"FAILED {item.path}: {item.error}", file=sys.stderr)
        else:
            print(f"captioned {item.path} ({len(item.documents)} caption(s))")
    if result.exit_code:
        print(json.dumps(result.error_report(), indent=2), file=sys.stderr)
    return result.exit_code


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()

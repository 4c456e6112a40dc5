"""Command-line interface for the synthesis, training, and report pipeline.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
Every command is deterministic for a given config and seed; FLUENTNET_WORKERS
sets the worker count for per-file stages without changing any output.
"""

from __future__ import annotations

import argparse
import sys

from . import pipeline
from .pipeline import DataError, NumericalError, UsageError, load_pipeline_config
from .synthesis import DISFLUENCY_TYPES


class _Parser(argparse.ArgumentParser):
    """argparse exits with code 2 on bad flags; remap to our usage code."""

    def error(self, message):
        raise UsageError(message)


def _add_common(parser) -> None:
    parser.add_argument("--config", metavar="PATH",
                        help="JSON pipeline configuration file")
    parser.add_argument("--seed", type=int, metavar="N",
                        help="global random seed (overrides config)")
    parser.add_argument("--out-dir", metavar="DIR",
                        help="output root directory (overrides config)")


def _add_dtype(parser) -> None:
    parser.add_argument("--dtype", choices=DISFLUENCY_TYPES,
                        help="restrict to one disfluency type")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="fluentnet",
        description="Synthesize stuttered speech, extract spectrogram clips, "
                    "and train/evaluate per-type disfluency detectors.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synthesize", help="inject disfluencies into clean recordings")
    _add_common(p)
    p.add_argument("--prob", type=float, metavar="P",
                   help="per-window injection probability (overrides config)")
    p.add_argument("--quota", action="append", metavar="TYPE=N",
                   help="cap injections per type per file; repeatable")

    p = sub.add_parser("featurize", help="cut the corpus into spectrogram clip datasets")
    _add_common(p)
    _add_dtype(p)

    p = sub.add_parser("train", help="train one detector per type per split")
    _add_common(p)
    _add_dtype(p)
    p.add_argument("--width-scale", type=float, metavar="S",
                   help="channel/hidden width multiplier (overrides config)")

    p = sub.add_parser("evaluate", help="score detectors on test folds, write reports")
    _add_common(p)
    _add_dtype(p)
    p.add_argument("--width-scale", type=float, metavar="S",
                   help="channel/hidden width multiplier (overrides config)")

    p = sub.add_parser("gradcheck", help="finite-difference check of every op and layer")
    p.add_argument("--seed", type=int, metavar="N", default=0,
                   help="seed for check inputs and sampled coordinates")

    p = sub.add_parser("stats", help="print corpus and dataset statistics")
    _add_common(p)
    _add_dtype(p)
    return parser


def _parse_quota(items: list[str]) -> dict[str, int]:
    quotas = {}
    for item in items:
        dtype, sep, count = item.partition("=")
        if not sep or dtype not in DISFLUENCY_TYPES:
            raise UsageError(f"--quota expects TYPE=N with TYPE in "
                             f"{'/'.join(DISFLUENCY_TYPES)}, got {item!r}")
        try:
            quotas[dtype] = int(count)
        except ValueError:
            raise UsageError(f"--quota count must be an integer, got {item!r}")
    return quotas


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "gradcheck":
            pipeline.cmd_gradcheck(args.seed)
            return 0
        overrides = {key: getattr(args, key, None)
                     for key in ("seed", "out_dir", "dtype", "prob", "width_scale")}
        if getattr(args, "quota", None):
            overrides["quota"] = _parse_quota(args.quota)
        config = load_pipeline_config(args.config, overrides)
        if args.command == "synthesize":
            pipeline.cmd_synthesize(config)
        elif args.command == "featurize":
            pipeline.cmd_featurize(config)
        elif args.command == "train":
            pipeline.cmd_train(config)
        elif args.command == "evaluate":
            pipeline.cmd_evaluate(config)
        elif args.command == "stats":
            pipeline.cmd_stats(config)
        return 0
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point.

Subcommands mirror the pipeline stages; every error class maps to its own
exit code so scripts can branch on failures. `HYPERWALK_LOG` sets the log
level (DEBUG, INFO, WARNING, ...).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from hyperwalk import __version__, pipeline

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_MISSING = 3
EXIT_HASH = 4
EXIT_DATA = 5


def _add_common(p: argparse.ArgumentParser, needs_seed: bool = True) -> None:
    p.add_argument("--config", required=True, help="pipeline config (JSON)")
    p.add_argument("--out", required=True, help="working directory for stage artifacts")
    if needs_seed:
        p.add_argument("--seed", type=int, default=None,
                       help="override the base seed from the config")
    p.add_argument("--jobs", type=int, default=1, help="worker count for parallel stages")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyperwalk",
        description="Hypergraph random-walk embeddings and hyperedge classification.")
    parser.add_argument("--version", action="version", version=f"hyperwalk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_common(sub.add_parser("ingest", help="build hypergraph, labels, and features"))
    _add_common(sub.add_parser("walks", help="generate vertex and hyperedge walk corpora"))
    _add_common(sub.add_parser("embed", help="train embedding tables from corpora"))

    p_train = sub.add_parser("train", help="split, train the classifier, report test metrics")
    _add_common(p_train)
    p_train.add_argument("--split", default=None,
                         help="override fractions, e.g. 50:50 or 80:10:10")

    _add_common(sub.add_parser("eval", help="re-score a saved checkpoint on its test split"),
                needs_seed=False)

    p_pipe = sub.add_parser("pipeline", help="run every stage end to end")
    _add_common(p_pipe)
    p_pipe.add_argument("--splits", default=None,
                        help="train percentages, e.g. 10,30,50 (rest is test)")
    p_pipe.add_argument("--runs", type=int, default=None, help="override training.runs")
    return parser


def _parse_split_arg(text: str):
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise pipeline.ConfigError(f"--split must have 2 or 3 parts, got {text!r}")
    try:
        pcts = [float(p) for p in parts]
    except ValueError as exc:
        raise pipeline.ConfigError(f"bad --split value {text!r}") from exc
    if abs(sum(pcts) - 100.0) > 1e-9:
        raise pipeline.ConfigError(f"--split percentages must sum to 100, got {text!r}")
    return [p / 100.0 for p in pcts]


def _configure_logging() -> None:
    level_name = os.environ.get("HYPERWALK_LOG", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s %(message)s",
                        force=True)


def main(argv=None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        cfg = pipeline.load_config(args.config)
        seed = getattr(args, "seed", None)
        base_seed = cfg["training"]["seed"] if seed is None else seed

        if args.command == "ingest":
            pipeline.run_ingest(cfg, args.out)
        elif args.command == "walks":
            pipeline.run_walks(cfg, args.out, seed=base_seed, jobs=args.jobs)
        elif args.command == "embed":
            pipeline.run_embed(cfg, args.out, seed=base_seed, jobs=args.jobs)
        elif args.command == "train":
            fractions = cfg["training"]["splits"][0]
            if args.split is not None:
                fractions = _parse_split_arg(args.split)
            pipeline.run_train(cfg, args.out, seed=base_seed, fractions=fractions)
        elif args.command == "eval":
            pipeline.run_eval(cfg, args.out)
        elif args.command == "pipeline":
            splits = pipeline.parse_splits_flag(args.splits) if args.splits else None
            pipeline.run_pipeline(cfg, args.out, seed=seed, jobs=args.jobs,
                                  splits=splits, runs=args.runs)
    except pipeline.ConfigError as exc:
        print(f"hyperwalk: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except pipeline.MissingArtifactError as exc:
        print(f"hyperwalk: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except pipeline.HashMismatchError as exc:
        print(f"hyperwalk: {exc}", file=sys.stderr)
        return EXIT_HASH
    except pipeline.DataError as exc:
        print(f"hyperwalk: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (OSError, ValueError) as exc:
        print(f"hyperwalk: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

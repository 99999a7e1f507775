#!/usr/bin/env python3
"""Run the citation-network benchmarks and print per-split aggregates.

Looks for the raw dataset files (searched recursively under --data):

  cora.content, cora.cites
  Pubmed-Diabetes.NODE.paper.tab, Pubmed-Diabetes.DIRECTED.cites.tab

and runs every benchmark whose files are present: cora with features on
10:90 / 30:70 / 50:50 splits, structure-only cora on 80:10:10, and a 20%
subsample of pubmed on 50:50. Each run goes through the full pipeline
(ingest, walks, embeddings, classifier) and leaves its artifacts under
--out/<name>/.
"""

import argparse
import json
import sys
import time
from pathlib import Path

from hyperwalk import cli, metrics


def find_file(root, name):
    return next(iter(sorted(Path(root).rglob(name))), None)


def benchmark_configs(data_dir):
    cora = {name: find_file(data_dir, name) for name in ("cora.content", "cora.cites")}
    pubmed = {name: find_file(data_dir, name)
              for name in ("Pubmed-Diabetes.NODE.paper.tab",
                           "Pubmed-Diabetes.DIRECTED.cites.tab")}
    out = {}
    if all(cora.values()):
        dataset = {"type": "cora_content", "name": "cora",
                   "content": str(cora["cora.content"]),
                   "cites": str(cora["cora.cites"]),
                   "expected_feature_dim": 1433}
        out["cora_features"] = {
            "version": 1,
            "dataset": dataset,
            "model": {"use_features": True},
            "training": {"splits": [[0.1, 0.9], [0.3, 0.7], [0.5, 0.5]],
                         "runs": 5, "seed": 0},
        }
        out["cora_structure"] = {
            "version": 1,
            "dataset": dataset,
            "model": {"use_features": False},
            "training": {"splits": [[0.8, 0.1, 0.1]], "runs": 5, "seed": 0},
        }
    else:
        print("skipping cora benchmarks: cora.content/cora.cites not found")
    if all(pubmed.values()):
        out["pubmed_subsample"] = {
            "version": 1,
            "dataset": {"type": "pubmed_native", "name": "pubmed",
                        "node": str(pubmed["Pubmed-Diabetes.NODE.paper.tab"]),
                        "cites": str(pubmed["Pubmed-Diabetes.DIRECTED.cites.tab"]),
                        "subsample_fraction": 0.2, "seed": 0},
            "model": {"use_features": True},
            "training": {"splits": [[0.5, 0.5]], "runs": 5, "seed": 0},
        }
    else:
        print("skipping pubmed benchmark: NODE/cites .tab files not found")
    return out


def report(metrics_csv):
    by_split = {}
    for row in metrics.read_results_csv(metrics_csv):
        by_split.setdefault(row["split"], []).append(row)
    for split, rows in sorted(by_split.items()):
        for field in ("micro_f1", "macro_f1", "accuracy"):
            mean, std = metrics.aggregate_runs([r[field] for r in rows])
            print(f"  {split:>9s} {field:<9s} {mean:.4f} +/- {std:.4f} "
                  f"({len(rows)} runs)")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--data", default="data", help="directory holding the raw dataset files")
    parser.add_argument("--out", default="results/benchmarks", help="output directory")
    parser.add_argument("--only", help="run a single benchmark by name")
    parser.add_argument("--jobs", type=int, default=1, help="worker cap for walks/embeddings")
    args = parser.parse_args(argv)

    configs = benchmark_configs(args.data)
    if args.only:
        if args.only not in configs:
            print(f"unknown or unavailable benchmark {args.only!r}; "
                  f"available: {sorted(configs)}")
            return 1
        configs = {args.only: configs[args.only]}
    if not configs:
        return 1

    failures = 0
    for name, config in configs.items():
        out_dir = Path(args.out) / name
        out_dir.mkdir(parents=True, exist_ok=True)
        config_path = out_dir / "config.json"
        config_path.write_text(json.dumps(config, indent=2))
        print(f"== {name} -> {out_dir}")
        started = time.monotonic()
        rc = cli.main(["pipeline", "--config", str(config_path),
                       "--out", str(out_dir / "run"), "--jobs", str(args.jobs)])
        elapsed = time.monotonic() - started
        if rc != cli.EXIT_OK:
            print(f"  FAILED with exit code {rc} after {elapsed:.0f}s")
            failures += 1
            continue
        print(f"  finished in {elapsed:.0f}s")
        report(out_dir / "run" / "metrics.csv")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())

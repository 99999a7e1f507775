"""Stage orchestration: ingest, walks, embed, train, eval, pipeline.

Every stage reads and writes plain files in a working directory and drops a
manifest (config snapshot, seed, content hashes of inputs and outputs, no
timestamps) so any stage can be re-run or audited. Downstream stages verify
upstream hashes before trusting an artifact.
"""

from __future__ import annotations

import copy
import hashlib
import json
import logging
import os
import time

import numpy as np

from hyperwalk import __version__
from hyperwalk import datasets as ds
from hyperwalk import dhe, metrics
from hyperwalk.hypergraph import dual, read_hypergraph, write_hypergraph
from hyperwalk.sgns import SgnsConfig, read_embeddings, train_embeddings, write_embeddings
from hyperwalk.walks import WalkConfig, generate_hyperedge_corpus, generate_vertex_corpus, read_corpus, write_corpus

log = logging.getLogger("hyperwalk.pipeline")


class ConfigError(ValueError):
    """Config schema violation: unknown key, bad type, bad value."""


class MissingArtifactError(FileNotFoundError):
    """A required upstream artifact is absent."""


class HashMismatchError(ValueError):
    """An input no longer matches the hash its producing manifest recorded."""


class DataError(ValueError):
    """Malformed dataset content."""


DATASET_TYPES = ("cora_content", "pubmed_native", "set_jsonl", "planted_set", "planted_citation")

_DEFAULTS = {
    "version": 1,
    "dataset": {
        "type": None,
        "name": None,
        "content": None,
        "cites": None,
        "node": None,
        "path": None,
        "params": {},
        "expected_feature_dim": None,
        "hyperedge_mode": "neighborhood",
        "subsample_fraction": None,
        "seed": 0,
        "negatives": None,
        "relabel": None,
    },
    "walks": {
        "alpha": 1.0,
        "beta": 0.1,
        "walks_per_start": 25,
        "walk_length": 25,
    },
    "vertex_embedding": {
        "dim": 16,
        "window": 5,
        "negatives": 5,
        "epochs": 5,
        "learning_rate": 0.025,
        "min_learning_rate": 1e-4,
        "noise_exponent": 0.75,
    },
    "hyperedge_embedding": {
        "dim": 128,
        "window": 5,
        "negatives": 5,
        "epochs": 5,
        "learning_rate": 0.025,
        "min_learning_rate": 1e-4,
        "noise_exponent": 0.75,
    },
    "model": {
        "variant": "full",
        "use_features": False,
        "j_context_layers": 2,
        "k_rho_layers": 2,
        "l_fusion_layers": 2,
        "m_feature_layers": 1,
        "phi_layers": 2,
        "hidden_width": 100,
        "context_out_width": 30,
        "dropout_rate": 0.5,
        "learning_rate": 0.1,
        "epochs": 200,
        "batch_size": 32,
        "patience": 20,
        "standardize_features": True,
    },
    "training": {
        "splits": [[0.5, 0.5]],
        "runs": 1,
        "seed": 0,
    },
}

_NEGATIVES_KEYS = {"scheme", "ratio", "label"}
_RELABEL_KEYS = {"mapping", "default"}


def _check_keys(section: dict, allowed, where: str) -> None:
    unknown = set(section) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown config key(s) {sorted(unknown)} in {where}")


def load_config(path) -> dict:
    """Parse and validate a pipeline config, filling defaults. Unknown keys
    anywhere in the schema are errors."""
    try:
        with open(path) as f:
            raw = json.load(f)
    except FileNotFoundError as exc:
        raise MissingArtifactError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return validate_config(raw)


def validate_config(raw: dict) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    _check_keys(raw, _DEFAULTS, "config root")
    if raw.get("version") != 1:
        raise ConfigError(f"unsupported config version {raw.get('version')!r}; expected 1")
    cfg = copy.deepcopy(_DEFAULTS)
    for section, defaults in _DEFAULTS.items():
        if section == "version":
            continue
        user = raw.get(section, {})
        if not isinstance(user, dict):
            raise ConfigError(f"config section {section!r} must be an object")
        _check_keys(user, defaults, f"section {section!r}")
        cfg[section].update(user)

    d = cfg["dataset"]
    if d["type"] not in DATASET_TYPES:
        raise ConfigError(f"dataset.type must be one of {DATASET_TYPES}, got {d['type']!r}")
    if d["name"] is None:
        d["name"] = d["type"]
    if d["negatives"] is not None:
        if not isinstance(d["negatives"], dict):
            raise ConfigError("dataset.negatives must be an object")
        _check_keys(d["negatives"], _NEGATIVES_KEYS, "dataset.negatives")
        if d["negatives"].get("scheme") not in ds.NEGATIVE_SCHEMES:
            raise ConfigError(f"dataset.negatives.scheme must be one of {ds.NEGATIVE_SCHEMES}")
    if d["relabel"] is not None:
        if not isinstance(d["relabel"], dict):
            raise ConfigError("dataset.relabel must be an object")
        _check_keys(d["relabel"], _RELABEL_KEYS, "dataset.relabel")
        if not isinstance(d["relabel"].get("mapping"), dict):
            raise ConfigError("dataset.relabel.mapping must be an object")
    if d["hyperedge_mode"] not in ("neighborhood", "cited"):
        raise ConfigError(f"dataset.hyperedge_mode must be 'neighborhood' or 'cited'")

    t = cfg["training"]
    if not isinstance(t["runs"], int) or t["runs"] < 1:
        raise ConfigError("training.runs must be a positive integer")
    if not isinstance(t["splits"], list) or not t["splits"]:
        raise ConfigError("training.splits must be a non-empty list of fraction lists")
    for fr in t["splits"]:
        if not isinstance(fr, list) or len(fr) not in (2, 3):
            raise ConfigError("each split must list 2 or 3 fractions")
        if abs(sum(fr) - 1.0) > 1e-9:
            raise ConfigError(f"split fractions {fr} do not sum to 1")
    if cfg["model"]["variant"] not in dhe.VARIANTS:
        raise ConfigError(f"model.variant must be one of {dhe.VARIANTS}")
    return cfg


def split_name(fractions) -> str:
    return ":".join(str(int(round(100 * f))) for f in fractions)


def parse_splits_flag(text: str):
    """`10,30,50` means train percentages with the rest as test."""
    out = []
    for part in text.split(","):
        try:
            pct = float(part)
        except ValueError as exc:
            raise ConfigError(f"bad --splits entry {part!r}") from exc
        if not 0 < pct < 100:
            raise ConfigError(f"--splits percentage {part!r} out of range (0, 100)")
        out.append([pct / 100.0, 1.0 - pct / 100.0])
    return out


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, stage: str, config: dict, seed: int, inputs, outputs,
                   extra: dict | None = None) -> str:
    manifest = {
        "stage": stage,
        "package_version": __version__,
        "config": config,
        "seed": seed,
        "inputs": {os.path.basename(p): sha256_file(p) for p in inputs},
        "outputs": {os.path.basename(p): sha256_file(p) for p in outputs},
    }
    if extra:
        manifest.update(extra)
    path = os.path.join(out_dir, f"manifest_{stage}.json")
    with open(path, "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def require_artifact(path):
    if not os.path.exists(path):
        raise MissingArtifactError(f"missing upstream artifact: {path}")
    return path


def verify_against_manifest(artifact_path, manifest_path) -> None:
    """If the producing manifest exists, the artifact must still hash to what
    that manifest recorded."""
    if not os.path.exists(manifest_path):
        return
    with open(manifest_path) as f:
        manifest = json.load(f)
    name = os.path.basename(artifact_path)
    recorded = manifest.get("outputs", {}).get(name)
    if recorded is None:
        return
    actual = sha256_file(artifact_path)
    if actual != recorded:
        raise HashMismatchError(
            f"{artifact_path}: content hash {actual[:12]}... does not match "
            f"{recorded[:12]}... recorded in {manifest_path}")


def _load_dataset(dcfg: dict):
    """Materialize the configured dataset as (hypergraph, label codes,
    label names, features-or-None, record ids)."""
    kind = dcfg["type"]
    try:
        if kind in ("cora_content", "pubmed_native", "planted_citation"):
            if kind == "cora_content":
                if not dcfg["content"] or not dcfg["cites"]:
                    raise ConfigError("cora_content needs dataset.content and dataset.cites paths")
                cit = ds.ingest_citation(require_artifact(dcfg["content"]),
                                         require_artifact(dcfg["cites"]),
                                         expected_feature_dim=dcfg["expected_feature_dim"])
            elif kind == "pubmed_native":
                if not dcfg["node"] or not dcfg["cites"]:
                    raise ConfigError("pubmed_native needs dataset.node and dataset.cites paths")
                cit = ds.ingest_pubmed(require_artifact(dcfg["node"]), require_artifact(dcfg["cites"]))
            else:
                cit = ds.make_planted_citation_dataset(**dcfg["params"])
            if dcfg["subsample_fraction"] is not None:
                cit = ds.subsample_citation(cit, dcfg["subsample_fraction"], dcfg["seed"])
            h, centroid = ds.neighborhood_hypergraph(cit, mode=dcfg["hyperedge_mode"])
            labels = cit.labels[centroid]
            features = cit.features[centroid]
            record_ids = [cit.paper_ids[i] for i in centroid]
            return h, labels, list(cit.label_names), features, record_ids

        if kind == "set_jsonl":
            if not dcfg["path"]:
                raise ConfigError("set_jsonl needs dataset.path")
            sd = ds.ingest_set_jsonl(require_artifact(dcfg["path"]), seed=dcfg["seed"])
        else:
            sd = ds.make_planted_set_dataset(**dcfg["params"])
        if dcfg["relabel"] is not None:
            sd = ds.relabel_classes(sd, dcfg["relabel"]["mapping"], dcfg["relabel"].get("default"))
        if dcfg["negatives"] is not None:
            n = dcfg["negatives"]
            sd = ds.synthesize_negatives(sd, n["scheme"], n.get("ratio", 1.0), seed=dcfg["seed"],
                                         negative_label=n.get("label", "negative"))
        h = ds.set_to_hypergraph(sd)
        return h, sd.labels, list(sd.label_names), None, list(sd.record_ids)
    except TypeError as exc:
        raise ConfigError(f"bad dataset.params: {exc}") from exc
    except (ValueError,) as exc:
        if isinstance(exc, (ConfigError, HashMismatchError)):
            raise
        raise DataError(str(exc)) from exc


def run_ingest(cfg: dict, out_dir) -> dict:
    os.makedirs(out_dir, exist_ok=True)
    dcfg = cfg["dataset"]
    h, labels, label_names, features, record_ids = _load_dataset(dcfg)
    hg_path = os.path.join(out_dir, "hypergraph.txt")
    labels_path = os.path.join(out_dir, "labels.tsv")
    meta_path = os.path.join(out_dir, "dataset.json")
    write_hypergraph(h, hg_path)
    ds.write_labels(labels_path, [label_names[c] for c in labels])
    outputs = [hg_path, labels_path, meta_path]
    features_path = None
    if features is not None:
        features_path = os.path.join(out_dir, "features.npy")
        np.save(features_path, np.ascontiguousarray(features))
        outputs.append(features_path)
    meta = {
        "name": dcfg["name"],
        "type": dcfg["type"],
        "n_vertices": h.n_vertices,
        "n_hyperedges": h.n_hyperedges,
        "label_names": label_names,
        "has_features": features is not None,
        "record_ids": record_ids,
    }
    with open(meta_path, "w") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")
    inputs = [p for p in (dcfg["content"], dcfg["cites"], dcfg["node"], dcfg["path"]) if p]
    write_manifest(out_dir, "ingest", cfg, cfg["training"]["seed"], inputs, outputs)
    log.info("ingest: %d vertices, %d hyperedges, %d classes",
             h.n_vertices, h.n_hyperedges, len(label_names))
    return meta


def _read_upstream_hypergraph(out_dir):
    hg_path = require_artifact(os.path.join(out_dir, "hypergraph.txt"))
    verify_against_manifest(hg_path, os.path.join(out_dir, "manifest_ingest.json"))
    return read_hypergraph(hg_path)


def run_walks(cfg: dict, out_dir, seed: int, jobs: int = 1) -> None:
    h = _read_upstream_hypergraph(out_dir)
    w = cfg["walks"]
    wcfg = WalkConfig(alpha=w["alpha"], beta=w["beta"], walks_per_start=w["walks_per_start"],
                      walk_length=w["walk_length"], seed=seed)
    t0 = time.monotonic()
    vertex_corpus = generate_vertex_corpus(h, wcfg, jobs=jobs)
    hyperedge_corpus = generate_hyperedge_corpus(h, wcfg, jobs=jobs)
    v_path = os.path.join(out_dir, "vertex_corpus.txt")
    e_path = os.path.join(out_dir, "hyperedge_corpus.txt")
    write_corpus(vertex_corpus, v_path)
    write_corpus(hyperedge_corpus, e_path)
    write_manifest(out_dir, "walks", cfg, seed,
                   [os.path.join(out_dir, "hypergraph.txt")], [v_path, e_path])
    log.info("walks: %d vertex + %d hyperedge walks in %.1fs",
             vertex_corpus.tokens.shape[0], hyperedge_corpus.tokens.shape[0], time.monotonic() - t0)


def _sgns_config(section: dict, seed: int) -> SgnsConfig:
    return SgnsConfig(dim=section["dim"], window=section["window"], negatives=section["negatives"],
                      epochs=section["epochs"], learning_rate=section["learning_rate"],
                      min_learning_rate=section["min_learning_rate"],
                      noise_exponent=section["noise_exponent"], seed=seed)


def run_embed(cfg: dict, out_dir, seed: int, jobs: int = 1) -> None:
    walks_manifest = os.path.join(out_dir, "manifest_walks.json")
    corpora = {}
    for space, fname in (("vertex", "vertex_corpus.txt"), ("hyperedge", "hyperedge_corpus.txt")):
        path = require_artifact(os.path.join(out_dir, fname))
        verify_against_manifest(path, walks_manifest)
        corpora[space] = read_corpus(path)
    t0 = time.monotonic()
    outputs = []
    for space, section in (("vertex", cfg["vertex_embedding"]), ("hyperedge", cfg["hyperedge_embedding"])):
        table = train_embeddings(corpora[space], _sgns_config(section, seed), jobs=jobs)
        path = os.path.join(out_dir, f"{space}_embeddings.txt")
        write_embeddings(table, path)
        outputs.append(path)
    write_manifest(out_dir, "embed", cfg, seed,
                   [os.path.join(out_dir, f) for f in ("vertex_corpus.txt", "hyperedge_corpus.txt")],
                   outputs)
    log.info("embed: two tables in %.1fs", time.monotonic() - t0)


def _dhe_config(section: dict, classes: int, use_features: bool, seed: int) -> dhe.DheConfig:
    return dhe.DheConfig(
        classes=classes, use_features=use_features, variant=section["variant"],
        j_context_layers=section["j_context_layers"], k_rho_layers=section["k_rho_layers"],
        l_fusion_layers=section["l_fusion_layers"], m_feature_layers=section["m_feature_layers"],
        phi_layers=section["phi_layers"], hidden_width=section["hidden_width"],
        context_out_width=section["context_out_width"], dropout_rate=section["dropout_rate"],
        learning_rate=section["learning_rate"], epochs=section["epochs"],
        batch_size=section["batch_size"], patience=section["patience"],
        standardize_features=section["standardize_features"], seed=seed)


def _load_examples(ingest_dir, embed_dir, use_features: bool):
    meta_path = require_artifact(os.path.join(ingest_dir, "dataset.json"))
    with open(meta_path) as f:
        meta = json.load(f)
    h = _read_upstream_hypergraph(ingest_dir)
    labels_path = require_artifact(os.path.join(ingest_dir, "labels.tsv"))
    verify_against_manifest(labels_path, os.path.join(ingest_dir, "manifest_ingest.json"))
    labels, label_names = ds.read_labels(labels_path)
    features = None
    if use_features:
        if not meta.get("has_features"):
            raise ConfigError("model.use_features is true but the dataset has no features")
        fpath = require_artifact(os.path.join(ingest_dir, "features.npy"))
        verify_against_manifest(fpath, os.path.join(ingest_dir, "manifest_ingest.json"))
        features = np.load(fpath)
    embed_manifest = os.path.join(embed_dir, "manifest_embed.json")
    vectors = {}
    for space in ("vertex", "hyperedge"):
        path = require_artifact(os.path.join(embed_dir, f"{space}_embeddings.txt"))
        verify_against_manifest(path, embed_manifest)
        vectors[space] = read_embeddings(path)
    examples = dhe.make_examples(h, vectors["hyperedge"], vectors["vertex"], labels, features)
    return examples, labels, label_names, meta


def run_train(cfg: dict, out_dir, seed: int, fractions, run_idx: int = 0,
              ingest_dir=None, embed_dir=None) -> dict:
    """Split, train, and evaluate once; writes split.json, model.npz,
    history.csv, and train_report.json into out_dir."""
    ingest_dir = ingest_dir or out_dir
    embed_dir = embed_dir or out_dir
    os.makedirs(out_dir, exist_ok=True)
    mcfg = cfg["model"]
    examples, labels, label_names, meta = _load_examples(ingest_dir, embed_dir, mcfg["use_features"])

    try:
        part = ds.split(np.arange(len(examples)), labels, fractions, seed)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    split_path = os.path.join(out_dir, "split.json")
    with open(split_path, "w") as f:
        json.dump({"train": part.train_ids.tolist(), "val": part.val_ids.tolist(),
                   "test": part.test_ids.tolist(), "fractions": list(part.fractions),
                   "seed": part.seed}, f)
        f.write("\n")

    dcfg = _dhe_config(mcfg, classes=len(label_names), use_features=mcfg["use_features"], seed=seed)
    t0 = time.monotonic()
    try:
        model, history = dhe.train(examples, part, dcfg, label_names)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    elapsed = time.monotonic() - t0

    history_path = os.path.join(out_dir, "history.csv")
    with open(history_path, "w") as f:
        f.write("epoch,train_loss,train_accuracy,val_loss,val_accuracy\n")
        for row in history:
            val_loss = f"{row['val_loss']:.6f}" if "val_loss" in row else ""
            val_acc = f"{row['val_accuracy']:.6f}" if "val_accuracy" in row else ""
            f.write(f"{row['epoch']},{row['train_loss']:.6f},{row['train_accuracy']:.6f},"
                    f"{val_loss},{val_acc}\n")

    model_path = os.path.join(out_dir, "model.npz")
    dhe.save_model(model_path, model)

    test_examples = [examples[i] for i in part.test_ids]
    test_eval = dhe.evaluate(model, test_examples)
    y_true, y_pred = test_eval["labels"], test_eval["predictions"]
    report = {
        "dataset": meta["name"],
        "split": split_name(fractions),
        "run": run_idx,
        "seed": seed,
        "variant": mcfg["variant"],
        "micro_f1": metrics.micro_f1(y_true, y_pred),
        "macro_f1": metrics.macro_f1(y_true, y_pred, n_classes=len(label_names)),
        "accuracy": metrics.accuracy(y_true, y_pred),
        "epochs_trained": len(history),
        "train_seconds": round(elapsed, 3),
    }
    report_path = os.path.join(out_dir, "train_report.json")
    with open(report_path, "w") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")
    write_manifest(out_dir, "train", cfg, seed,
                   [os.path.join(ingest_dir, "hypergraph.txt"),
                    os.path.join(ingest_dir, "labels.tsv"),
                    os.path.join(embed_dir, "vertex_embeddings.txt"),
                    os.path.join(embed_dir, "hyperedge_embeddings.txt")],
                   [split_path, model_path, history_path, report_path],
                   extra={"stage_dirs": {"ingest": os.path.relpath(ingest_dir, out_dir),
                                         "embed": os.path.relpath(embed_dir, out_dir)}})
    log.info("train: %s split %s run %d: micro %.4f macro %.4f acc %.4f (%.1fs)",
             meta["name"], report["split"], run_idx,
             report["micro_f1"], report["macro_f1"], report["accuracy"], elapsed)
    return report


def run_eval(cfg: dict, out_dir, ingest_dir=None, embed_dir=None) -> dict:
    """Re-score the saved checkpoint on the saved test split; the result must
    equal what training recorded."""
    train_manifest = os.path.join(out_dir, "manifest_train.json")
    if (ingest_dir is None or embed_dir is None) and os.path.exists(train_manifest):
        with open(train_manifest) as f:
            dirs = json.load(f).get("stage_dirs", {})
        if ingest_dir is None and "ingest" in dirs:
            ingest_dir = os.path.join(out_dir, dirs["ingest"])
        if embed_dir is None and "embed" in dirs:
            embed_dir = os.path.join(out_dir, dirs["embed"])
    ingest_dir = ingest_dir or out_dir
    embed_dir = embed_dir or out_dir
    mcfg = cfg["model"]
    examples, labels, label_names, meta = _load_examples(ingest_dir, embed_dir, mcfg["use_features"])
    model_path = require_artifact(os.path.join(out_dir, "model.npz"))
    split_path = require_artifact(os.path.join(out_dir, "split.json"))
    verify_against_manifest(model_path, train_manifest)
    verify_against_manifest(split_path, train_manifest)
    model = dhe.load_model(model_path)
    with open(split_path) as f:
        saved = json.load(f)
    test_ids = np.asarray(saved["test"], dtype=np.int64)
    test_examples = [examples[i] for i in test_ids]
    test_eval = dhe.evaluate(model, test_examples)
    y_true, y_pred = test_eval["labels"], test_eval["predictions"]
    report = {
        "dataset": meta["name"],
        "micro_f1": metrics.micro_f1(y_true, y_pred),
        "macro_f1": metrics.macro_f1(y_true, y_pred, n_classes=len(label_names)),
        "accuracy": metrics.accuracy(y_true, y_pred),
        "n_test": int(len(test_examples)),
    }
    report_path = os.path.join(out_dir, "eval_report.json")
    with open(report_path, "w") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")
    write_manifest(out_dir, "eval", cfg, saved["seed"],
                   [model_path, split_path], [report_path])
    log.info("eval: %s micro %.4f macro %.4f acc %.4f over %d test examples",
             meta["name"], report["micro_f1"], report["macro_f1"], report["accuracy"],
             report["n_test"])
    return report


def _write_embedding_csv(table_path, csv_path) -> None:
    vectors = read_embeddings(table_path)
    with open(csv_path, "w") as f:
        f.write("token_id," + ",".join(f"dim{i}" for i in range(vectors.shape[1])) + "\n")
        for t in range(vectors.shape[0]):
            f.write(str(t) + "," + ",".join(f"{x:.6f}" for x in vectors[t]) + "\n")


def run_pipeline(cfg: dict, out_dir, seed: int | None = None, jobs: int = 1,
                 splits=None, runs: int | None = None) -> list:
    """Chain every stage: one ingest, then per-run walks and embeddings reused
    across all split ratios; emits metrics.csv and run-0 embedding CSVs."""
    os.makedirs(out_dir, exist_ok=True)
    base_seed = cfg["training"]["seed"] if seed is None else seed
    n_runs = cfg["training"]["runs"] if runs is None else runs
    split_list = cfg["training"]["splits"] if splits is None else splits
    if n_runs < 1:
        raise ConfigError("runs must be >= 1")

    meta = run_ingest(cfg, out_dir)
    rows, reports = [], []
    for r in range(n_runs):
        run_seed = base_seed + r
        run_dir = os.path.join(out_dir, f"run{r}")
        os.makedirs(run_dir, exist_ok=True)
        for fname in ("hypergraph.txt", "labels.tsv", "manifest_ingest.json"):
            src = os.path.join(out_dir, fname)
            dst = os.path.join(run_dir, fname)
            with open(src, "rb") as fsrc, open(dst, "wb") as fdst:
                fdst.write(fsrc.read())
        run_walks(cfg, run_dir, seed=run_seed, jobs=jobs)
        run_embed(cfg, run_dir, seed=run_seed, jobs=jobs)
        for fractions in split_list:
            name = split_name(fractions)
            train_dir = os.path.join(run_dir, "split_" + name.replace(":", "_"))
            report = run_train(cfg, train_dir, seed=run_seed, fractions=fractions, run_idx=r,
                               ingest_dir=out_dir, embed_dir=run_dir)
            reports.append(report)
            rows.append(metrics.format_result_row(
                meta["name"], name, r, run_seed,
                report["micro_f1"], report["macro_f1"], report["accuracy"]))

    metrics_path = os.path.join(out_dir, "metrics.csv")
    metrics.write_results_csv(metrics_path, rows)
    run0 = os.path.join(out_dir, "run0")
    csv_outputs = []
    for space in ("vertex", "hyperedge"):
        csv_path = os.path.join(out_dir, f"{space}_embeddings.csv")
        _write_embedding_csv(os.path.join(run0, f"{space}_embeddings.txt"), csv_path)
        csv_outputs.append(csv_path)
    write_manifest(out_dir, "pipeline", cfg, base_seed, [], [metrics_path] + csv_outputs)
    for name in sorted({row["split"] for row in metrics.read_results_csv(metrics_path)}):
        vals = [r["micro_f1"] for r in metrics.read_results_csv(metrics_path) if r["split"] == name]
        mean, std = metrics.aggregate_runs(vals)
        log.info("pipeline: %s split %s micro %.4f +/- %.4f over %d runs",
                 meta["name"], name, mean, std, len(vals))
    return reports

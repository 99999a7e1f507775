import hashlib
import json
import logging
import os

import numpy as np
import pytest

from conftest import tiny_pipeline_config
from hyperwalk import cli
from hyperwalk import metrics as mx
from hyperwalk import pipeline as pl


@pytest.fixture(autouse=True)
def restore_root_logger():
    """cli.main reconfigures the root logger; put it back after each test."""
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


def load_json(path):
    with open(path) as f:
        return json.load(f)


def rewrite_config(path, mutate):
    cfg = load_json(path)
    mutate(cfg)
    path.write_text(json.dumps(cfg))
    return path


# -- config parsing -----------------------------------------------------------


def test_config_defaults_filled(tmp_path):
    cfg = pl.load_config(tiny_pipeline_config(tmp_path))
    assert cfg["walks"]["alpha"] == 1.0
    assert cfg["walks"]["beta"] == 0.1
    assert cfg["walks"]["walks_per_start"] == 3  # override kept
    assert cfg["vertex_embedding"]["window"] == 5
    assert cfg["hyperedge_embedding"]["dim"] == 12
    assert cfg["model"]["variant"] == "full"
    assert cfg["model"]["use_features"] is False
    assert cfg["dataset"]["name"] == "tiny"
    assert cfg["training"]["splits"] == [[0.8, 0.1, 0.1]]


def test_config_rejects_unknown_keys(tmp_path):
    path = tiny_pipeline_config(tmp_path)
    rewrite_config(path, lambda c: c.update(surprise=1))
    with pytest.raises(pl.ConfigError, match="surprise"):
        pl.load_config(path)
    path = tiny_pipeline_config(tmp_path)
    rewrite_config(path, lambda c: c["walks"].update(alpa=1.0))
    with pytest.raises(pl.ConfigError, match="alpa"):
        pl.load_config(path)
    path = tiny_pipeline_config(tmp_path)
    rewrite_config(path, lambda c: c["dataset"]["negatives"].update(mode="x"))
    with pytest.raises(pl.ConfigError, match="mode"):
        pl.load_config(path)


def test_config_rejects_bad_values(tmp_path):
    def expect(mutate, message):
        path = rewrite_config(tiny_pipeline_config(tmp_path), mutate)
        with pytest.raises(pl.ConfigError, match=message):
            pl.load_config(path)

    expect(lambda c: c.update(version=2), "version")
    expect(lambda c: c["dataset"].update(type="csv"), "dataset.type")
    expect(lambda c: c["training"].update(splits=[[0.5, 0.4]]), "sum to 1")
    expect(lambda c: c["training"].update(splits=[]), "non-empty")
    expect(lambda c: c["training"].update(runs=0), "positive")
    expect(lambda c: c["model"].update(variant="gnn"), "variant")
    expect(lambda c: c["dataset"].update(hyperedge_mode="both"), "hyperedge_mode")
    expect(lambda c: c["dataset"]["negatives"].update(scheme="gaussian"), "scheme")


def test_config_file_errors(tmp_path):
    with pytest.raises(pl.MissingArtifactError):
        pl.load_config(tmp_path / "absent.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(pl.ConfigError, match="invalid JSON"):
        pl.load_config(bad)


def test_split_name():
    assert pl.split_name([0.5, 0.5]) == "50:50"
    assert pl.split_name([0.8, 0.1, 0.1]) == "80:10:10"
    assert pl.split_name([0.1, 0.9]) == "10:90"


def test_parse_splits_flag():
    assert pl.parse_splits_flag("10,30,50") == [[0.1, 0.9], [0.3, 0.7], [0.5, 0.5]]
    with pytest.raises(pl.ConfigError, match="bad --splits"):
        pl.parse_splits_flag("ten")
    with pytest.raises(pl.ConfigError, match="out of range"):
        pl.parse_splits_flag("0")
    with pytest.raises(pl.ConfigError, match="out of range"):
        pl.parse_splits_flag("100")


def test_parse_split_arg():
    assert cli._parse_split_arg("50:50") == [0.5, 0.5]
    assert cli._parse_split_arg("80:10:10") == [0.8, 0.1, 0.1]
    with pytest.raises(pl.ConfigError, match="sum to 100"):
        cli._parse_split_arg("50:40")
    with pytest.raises(pl.ConfigError, match="2 or 3 parts"):
        cli._parse_split_arg("100")


# -- manifests ----------------------------------------------------------------


def test_sha256_file(tmp_path):
    p = tmp_path / "blob.bin"
    p.write_bytes(b"abc" * 1000)
    assert pl.sha256_file(p) == hashlib.sha256(b"abc" * 1000).hexdigest()


def test_manifest_roundtrip_and_tamper(tmp_path):
    artifact = tmp_path / "data.txt"
    artifact.write_text("original\n")
    manifest_path = pl.write_manifest(tmp_path, "demo", {"version": 1}, seed=3,
                                      inputs=[], outputs=[artifact])
    manifest = load_json(manifest_path)
    assert manifest["stage"] == "demo"
    assert manifest["seed"] == 3
    assert "timestamp" not in manifest
    assert manifest["outputs"]["data.txt"] == pl.sha256_file(artifact)

    pl.verify_against_manifest(artifact, manifest_path)  # clean: no error
    artifact.write_text("tampered\n")
    with pytest.raises(pl.HashMismatchError, match="data.txt"):
        pl.verify_against_manifest(artifact, manifest_path)
    # no manifest recorded: nothing to verify against
    pl.verify_against_manifest(artifact, tmp_path / "nope.json")


def test_require_artifact(tmp_path):
    p = tmp_path / "x"
    with pytest.raises(pl.MissingArtifactError, match="missing upstream"):
        pl.require_artifact(p)
    p.write_text("ok")
    assert pl.require_artifact(p) == p


# -- single stages ------------------------------------------------------------


def test_run_ingest_artifacts(tmp_path):
    cfg = pl.load_config(tiny_pipeline_config(tmp_path))
    out = tmp_path / "work"
    meta = pl.run_ingest(cfg, out)
    assert (out / "hypergraph.txt").exists()
    assert (out / "labels.tsv").exists()
    dataset = load_json(out / "dataset.json")
    assert dataset["name"] == "tiny"
    # negatives at ratio 1.0 double the planted 40 records
    assert dataset["n_hyperedges"] == 80
    assert sorted(dataset["label_names"]) == ["complex", "negative"]
    assert dataset["has_features"] is False
    manifest = load_json(out / "manifest_ingest.json")
    assert set(manifest["outputs"]) >= {"hypergraph.txt", "labels.tsv", "dataset.json"}
    assert meta["n_hyperedges"] == 80
    n_label_rows = len((out / "labels.tsv").read_text().splitlines())
    assert n_label_rows == 80


def test_run_ingest_writes_features_when_present(tmp_path):
    path = tiny_pipeline_config(tmp_path)
    rewrite_config(path, lambda c: c["dataset"].update(
        type="planted_citation", name="cite",
        params={"n_papers": 40, "n_classes": 3, "feature_dim": 10, "seed": 1},
        negatives=None))
    cfg = pl.load_config(path)
    out = tmp_path / "work"
    pl.run_ingest(cfg, out)
    feats = np.load(out / "features.npy")
    assert feats.shape == (40, 10)
    assert load_json(out / "dataset.json")["has_features"] is True


# -- CLI end to end -----------------------------------------------------------


@pytest.fixture(scope="module")
def piperun(tmp_path_factory):
    """One full pipeline run shared by the read-only assertions below."""
    base = tmp_path_factory.mktemp("piperun")
    config = tiny_pipeline_config(base)
    out = base / "out"
    rc = cli.main(["pipeline", "--config", str(config), "--out", str(out)])
    assert rc == cli.EXIT_OK
    return config, out


def test_pipeline_writes_expected_tree(piperun):
    config, out = piperun
    for name in ("hypergraph.txt", "labels.tsv", "dataset.json", "metrics.csv",
                 "vertex_embeddings.csv", "hyperedge_embeddings.csv",
                 "manifest_ingest.json", "manifest_pipeline.json"):
        assert (out / name).exists(), name
    run0 = out / "run0"
    assert (run0 / "vertex_corpus.txt").exists()
    assert (run0 / "hyperedge_corpus.txt").exists()
    assert (run0 / "vertex_embeddings.txt").exists()
    train_dir = run0 / "split_80_10_10"
    for name in ("split.json", "model.npz", "history.csv", "train_report.json",
                 "manifest_train.json"):
        assert (train_dir / name).exists(), name


def test_pipeline_metrics_rows(piperun):
    config, out = piperun
    rows = mx.read_results_csv(out / "metrics.csv")
    assert len(rows) == 1
    row = rows[0]
    assert row["dataset"] == "tiny"
    assert row["split"] == "80:10:10"
    assert row["run"] == 0
    assert row["seed"] == 0
    report = load_json(out / "run0" / "split_80_10_10" / "train_report.json")
    assert row["micro_f1"] == pytest.approx(report["micro_f1"], abs=1e-6)
    assert row["accuracy"] == pytest.approx(report["accuracy"], abs=1e-6)


def test_pipeline_embedding_csv_shape(piperun):
    config, out = piperun
    lines = (out / "vertex_embeddings.csv").read_text().splitlines()
    assert lines[0] == "token_id," + ",".join(f"dim{i}" for i in range(8))
    assert len(lines) == 1 + 60
    lines = (out / "hyperedge_embeddings.csv").read_text().splitlines()
    assert len(lines) == 1 + 80


def test_eval_reproduces_train_metrics(piperun):
    config, out = piperun
    train_dir = out / "run0" / "split_80_10_10"
    rc = cli.main(["eval", "--config", str(config), "--out", str(train_dir)])
    assert rc == cli.EXIT_OK
    train_report = load_json(train_dir / "train_report.json")
    eval_report = load_json(train_dir / "eval_report.json")
    for key in ("micro_f1", "macro_f1", "accuracy"):
        assert eval_report[key] == train_report[key]


def test_train_manifest_records_stage_dirs(piperun):
    config, out = piperun
    manifest = load_json(out / "run0" / "split_80_10_10" / "manifest_train.json")
    assert manifest["stage_dirs"]["embed"] == ".."
    assert manifest["stage_dirs"]["ingest"] == os.path.join("..", "..")
    assert manifest["config"]["dataset"]["name"] == "tiny"


def test_pipeline_is_deterministic(piperun, tmp_path):
    config, out = piperun
    again = tmp_path / "again"
    rc = cli.main(["pipeline", "--config", str(config), "--out", str(again)])
    assert rc == cli.EXIT_OK
    assert (again / "metrics.csv").read_bytes() == (out / "metrics.csv").read_bytes()
    assert (again / "vertex_embeddings.csv").read_bytes() == \
        (out / "vertex_embeddings.csv").read_bytes()


def test_pipeline_splits_and_runs_flags(tmp_path):
    config = tiny_pipeline_config(tmp_path)
    out = tmp_path / "out"
    rc = cli.main(["pipeline", "--config", str(config), "--out", str(out),
                   "--splits", "50,70", "--runs", "2"])
    assert rc == cli.EXIT_OK
    rows = mx.read_results_csv(out / "metrics.csv")
    assert len(rows) == 4  # 2 splits x 2 runs
    assert {r["split"] for r in rows} == {"50:50", "70:30"}
    assert {r["run"] for r in rows} == {0, 1}
    assert {r["seed"] for r in rows} == {0, 1}  # base seed + run index
    # both split ratios of one run reuse the same embedding files
    m50 = load_json(out / "run1" / "split_50_50" / "manifest_train.json")
    m70 = load_json(out / "run1" / "split_70_30" / "manifest_train.json")
    assert m50["inputs"]["vertex_embeddings.txt"] == m70["inputs"]["vertex_embeddings.txt"]


def test_staged_cli_flow(tmp_path):
    config = tiny_pipeline_config(tmp_path)
    out = str(tmp_path / "stagedir")
    assert cli.main(["ingest", "--config", str(config), "--out", out]) == 0
    assert cli.main(["walks", "--config", str(config), "--out", out]) == 0
    assert cli.main(["embed", "--config", str(config), "--out", out]) == 0
    assert cli.main(["train", "--config", str(config), "--out", out,
                     "--split", "80:10:10"]) == 0
    assert cli.main(["eval", "--config", str(config), "--out", out]) == 0
    train_report = load_json(os.path.join(out, "train_report.json"))
    eval_report = load_json(os.path.join(out, "eval_report.json"))
    assert eval_report["accuracy"] == train_report["accuracy"]


def test_cli_exit_codes(tmp_path):
    config = tiny_pipeline_config(tmp_path)
    out = str(tmp_path / "w")
    for sub in ("a", "b", "c"):
        os.makedirs(tmp_path / sub)

    bad_version = rewrite_config(tiny_pipeline_config(tmp_path / "a"),
                                 lambda c: c.update(version=2))
    assert cli.main(["ingest", "--config", str(bad_version), "--out", out]) == cli.EXIT_CONFIG

    unknown_key = rewrite_config(tiny_pipeline_config(tmp_path / "b"),
                                 lambda c: c["model"].update(depth=9))
    assert cli.main(["ingest", "--config", str(unknown_key), "--out", out]) == cli.EXIT_CONFIG

    # walks before ingest: upstream artifact missing
    empty = str(tmp_path / "empty")
    os.makedirs(empty)
    assert cli.main(["walks", "--config", str(config), "--out", empty]) == cli.EXIT_MISSING

    # tampered upstream artifact fails the hash check
    staged = str(tmp_path / "staged")
    assert cli.main(["ingest", "--config", str(config), "--out", staged]) == 0
    with open(os.path.join(staged, "hypergraph.txt"), "a") as f:
        f.write("0 1\n")
    assert cli.main(["walks", "--config", str(config), "--out", staged]) == cli.EXIT_HASH

    # unreadable data in a referenced file
    jsonl = tmp_path / "sets.jsonl"
    jsonl.write_text("{broken\n")
    bad_data = rewrite_config(
        tiny_pipeline_config(tmp_path / "c"),
        lambda c: c["dataset"].update(type="set_jsonl", path=str(jsonl),
                                      params={}, negatives=None))
    assert cli.main(["ingest", "--config", str(bad_data), "--out", out]) == cli.EXIT_DATA

    # config path that exists but cannot be parsed as a file
    assert cli.main(["ingest", "--config", str(tmp_path), "--out", out]) == cli.EXIT_ERROR


def test_cli_log_level_env(monkeypatch):
    monkeypatch.setenv("HYPERWALK_LOG", "DEBUG")
    cli._configure_logging()
    assert logging.getLogger().level == logging.DEBUG
    monkeypatch.setenv("HYPERWALK_LOG", "info")
    cli._configure_logging()
    assert logging.getLogger().level == logging.INFO
    monkeypatch.setenv("HYPERWALK_LOG", "bogus")
    cli._configure_logging()
    assert logging.getLogger().level == logging.WARNING
    monkeypatch.delenv("HYPERWALK_LOG")
    cli._configure_logging()
    assert logging.getLogger().level == logging.WARNING

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import strategies

from hyperwalk.hypergraph import build


@st.composite
def hypergraphs(draw, max_vertices=10, max_edges=8):
    """Random valid hypergraphs: no empty hyperedge, no isolated vertex."""
    n_v = draw(st.integers(1, max_vertices))
    n_e = draw(st.integers(1, max_edges))
    edges = [
        sorted(draw(st.sets(st.integers(0, n_v - 1), min_size=1, max_size=n_v)))
        for _ in range(n_e)
    ]
    covered = set().union(*edges)
    for v in range(n_v):
        if v not in covered:
            edges[v % n_e].append(v)
    return build([sorted(set(e)) for e in edges], n_vertices=n_v)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def tiny_pipeline_config(tmp_path, **overrides):
    """Small planted-set config that runs the full pipeline in seconds."""
    cfg = {
        "version": 1,
        "dataset": {
            "type": "planted_set",
            "name": "tiny",
            "params": {"n_vertices": 60, "n_communities": 3, "n_records": 40, "seed": 5,
                       "card_small": [3, 5], "card_tail": [6, 12], "tail_fraction": 0.2},
            "negatives": {"scheme": "uniform_cardinality", "ratio": 1.0},
        },
        "walks": {"walks_per_start": 3, "walk_length": 8},
        "vertex_embedding": {"dim": 8, "epochs": 1},
        "hyperedge_embedding": {"dim": 12, "epochs": 1},
        "model": {"epochs": 4, "hidden_width": 20, "context_out_width": 10, "patience": 3},
        "training": {"splits": [[0.8, 0.1, 0.1]], "runs": 1, "seed": 0},
    }
    for key, value in overrides.items():
        cfg[key].update(value)
    path = tmp_path / "config.json"
    import json
    path.write_text(json.dumps(cfg))
    return path

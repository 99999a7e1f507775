"""Dwell-and-escape random walks over hypergraphs.

A walk lives inside one hyperedge at a time. At every step it escapes to
another hyperedge incident to the current vertex with probability
``p = min(alpha / |e| + beta, 1)`` and otherwise keeps sampling vertices
from the current hyperedge, so the number of consecutive samples drawn from
one hyperedge is geometric with success probability p. Walks over hyperedge
ids are the same procedure run on the dual hypergraph.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from hyperwalk.hypergraph import Hypergraph, dual

log = logging.getLogger("hyperwalk.walks")

VERTEX_SPACE = "vertex"
HYPEREDGE_SPACE = "hyperedge"


@dataclass(frozen=True)
class WalkConfig:
    alpha: float = 1.0
    beta: float = 0.1
    walks_per_start: int = 25
    walk_length: int = 25
    seed: int = 0

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be nonnegative")
        if self.walk_length < 1:
            raise ValueError("walk_length must be >= 1")
        if self.walks_per_start < 1:
            raise ValueError("walks_per_start must be >= 1")


@dataclass
class WalkCorpus:
    """Fixed-length walk corpus; ``tokens`` has shape (n_walks, walk_length)."""

    tokens: np.ndarray
    token_space: str
    n_tokens: int

    @property
    def n_walks(self) -> int:
        return self.tokens.shape[0]

    @property
    def walk_length(self) -> int:
        return self.tokens.shape[1]


def traverse_probability(cardinality: int, cfg: WalkConfig) -> float:
    """Escape probability for a hyperedge of the given cardinality: min(a/|e| + b, 1)."""
    if cardinality < 1:
        raise ValueError("cardinality must be >= 1")
    return min(cfg.alpha / cardinality + cfg.beta, 1.0)


def _walk_rng(seed: int, start: int, walk_idx: int) -> np.random.Generator:
    # independent stream per (seed, start token, walk index): corpus generation
    # parallelizes without changing results
    return np.random.default_rng(np.random.SeedSequence([seed, start, walk_idx]))


def sat_walk_trace(h: Hypergraph, start_vertex: int, cfg: WalkConfig, rng: np.random.Generator):
    """One walk plus its per-step escape decisions (for dwell-time statistics).

    Returns (tokens, escaped) where ``escaped[i]`` says whether the transition
    into token i+1 was an escape draw. An escape with no alternative incident
    hyperedge falls back to the current one but still counts as an escape
    event, which is what makes dwell lengths exactly geometric.
    """
    inc0 = h.vertex_incidence[start_vertex]
    if inc0.size == 0:
        raise ValueError(f"start vertex {start_vertex} has no incident hyperedges")
    tokens = np.empty(cfg.walk_length, dtype=np.int32)
    escaped = np.zeros(max(cfg.walk_length - 1, 0), dtype=bool)
    tokens[0] = start_vertex
    v = start_vertex
    e = int(inc0[rng.integers(inc0.size)])
    for i in range(1, cfg.walk_length):
        members = h.hyperedges[e]
        p = min(cfg.alpha / members.size + cfg.beta, 1.0)
        if rng.random() < p:
            escaped[i - 1] = True
            inc = h.vertex_incidence[v]
            if inc.size > 1:
                pos = int(np.searchsorted(inc, e))
                j = int(rng.integers(inc.size - 1))
                if j >= pos:
                    j += 1
                e = int(inc[j])
                members = h.hyperedges[e]
            # sole incident hyperedge: stay
        v = int(members[rng.integers(members.size)])
        tokens[i] = v
    return tokens, escaped


def sat_walk(h: Hypergraph, start_vertex: int, cfg: WalkConfig, rng: np.random.Generator) -> np.ndarray:
    """Vertex-id walk of length ``cfg.walk_length`` starting at ``start_vertex``."""
    tokens, _ = sat_walk_trace(h, start_vertex, cfg, rng)
    return tokens


def _walks_for_start(h: Hypergraph, start: int, cfg: WalkConfig) -> np.ndarray:
    out = np.empty((cfg.walks_per_start, cfg.walk_length), dtype=np.int32)
    for w in range(cfg.walks_per_start):
        out[w] = sat_walk(h, start, cfg, _walk_rng(cfg.seed, start, w))
    return out


def generate_vertex_corpus(h: Hypergraph, cfg: WalkConfig, jobs: int = 1) -> WalkCorpus:
    """All-starts corpus: ``walks_per_start`` walks from every vertex.

    Walks are merged in start-vertex order whatever the worker count, so the
    corpus is a pure function of (h, cfg).
    """
    starts = range(h.n_vertices)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            blocks = list(pool.map(lambda s: _walks_for_start(h, s, cfg), starts))
    else:
        blocks = [_walks_for_start(h, s, cfg) for s in starts]
    tokens = np.vstack(blocks)
    return WalkCorpus(tokens=tokens, token_space=VERTEX_SPACE, n_tokens=h.n_vertices)


def generate_hyperedge_corpus(h: Hypergraph, cfg: WalkConfig, jobs: int = 1) -> WalkCorpus:
    """Hyperedge-id corpus: the vertex procedure applied to the dual."""
    corpus = generate_vertex_corpus(dual(h), cfg, jobs=jobs)
    return WalkCorpus(tokens=corpus.tokens, token_space=HYPEREDGE_SPACE, n_tokens=h.n_hyperedges)


def write_corpus(corpus: WalkCorpus, path) -> None:
    """One walk per line, space-separated token ids, with a one-line header."""
    with open(path, "w") as f:
        f.write(f"#space={corpus.token_space} length={corpus.walk_length} count={corpus.n_walks}\n")
        for row in corpus.tokens:
            f.write(" ".join(str(int(t)) for t in row))
            f.write("\n")


def read_corpus(path, n_tokens: int | None = None) -> WalkCorpus:
    with open(path) as f:
        header = f.readline().strip()
        if not header.startswith("#space="):
            raise ValueError(f"{path}: missing corpus header")
        fields = dict(part.split("=", 1) for part in header[1:].split())
        space = fields["space"]
        length = int(fields["length"])
        count = int(fields["count"])
        tokens = np.loadtxt(f, dtype=np.int32, ndmin=2)
    if tokens.shape != (count, length):
        raise ValueError(f"{path}: header says {count}x{length}, file has {tokens.shape}")
    if space not in (VERTEX_SPACE, HYPEREDGE_SPACE):
        raise ValueError(f"{path}: unknown token space {space!r}")
    if n_tokens is None:
        n_tokens = int(tokens.max()) + 1
    return WalkCorpus(tokens=tokens, token_space=space, n_tokens=n_tokens)


def measure_dwell_lengths(h: Hypergraph, start_vertex: int, cfg: WalkConfig, n_walks: int) -> np.ndarray:
    """Completed dwell lengths (steps between consecutive escape events) across walks."""
    lengths = []
    for w in range(n_walks):
        _, escaped = sat_walk_trace(h, start_vertex, cfg, _walk_rng(cfg.seed, start_vertex, w))
        run = 0
        for flag in escaped:
            run += 1
            if flag:
                lengths.append(run)
                run = 0
    return np.asarray(lengths, dtype=np.int64)

"""Skip-gram with negative sampling over walk corpora.

The trainer runs plain SGD, one (center, context) pair at a time in corpus
order: score the observed pair against ``negatives`` noise tokens drawn from
the unigram^noise_exponent distribution, compute all gradients at the current
parameters, apply. The hot loop is JIT-compiled; ``_sgd_shard.py_func`` is the
identical pure-Python reference used by the equivalence tests.

Noise draws use a Wichmann-Hill generator carried in three int64 state words
so the compiled and interpreted paths produce the same stream.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass

import numba
import numpy as np

from hyperwalk.walks import WalkCorpus

log = logging.getLogger("hyperwalk.sgns")


@dataclass(frozen=True)
class SgnsConfig:
    dim: int
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    min_learning_rate: float = 1e-4
    noise_exponent: float = 0.75
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.negatives < 1:
            raise ValueError("negatives must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


@dataclass
class EmbeddingTable:
    """Token embeddings; ``input_vectors`` is the table exported downstream."""

    input_vectors: np.ndarray
    output_vectors: np.ndarray

    def __post_init__(self):
        if self.input_vectors.shape != self.output_vectors.shape:
            raise ValueError("input and output tables must have the same shape")
        if not (np.isfinite(self.input_vectors).all() and np.isfinite(self.output_vectors).all()):
            raise ValueError("embedding table contains non-finite entries")

    @property
    def tokens(self) -> int:
        return self.input_vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.input_vectors.shape[1]


@dataclass
class PairGradients:
    d_center: np.ndarray
    d_context: np.ndarray
    d_negatives: np.ndarray  # one row per negative slot; repeated tokens accumulate


def _log_sigmoid(x):
    return -np.logaddexp(0.0, -x)


def sigmoid(x):
    return np.exp(_log_sigmoid(x))


def pair_loss_and_grads(center: int, context: int, negatives, table: EmbeddingTable):
    """Loss and exact gradients of one (center, context, negatives) unit.

    loss = -log s(vc.vo) - sum_k log s(-vc.vn_k), gradients taken at the
    current parameters for the center input vector and each output vector.
    """
    vc = table.input_vectors[center]
    vo = table.output_vectors[context]
    neg = np.asarray(negatives, dtype=np.int64)
    vn = table.output_vectors[neg]
    s_o = float(vc @ vo)
    s_k = vn @ vc
    loss = -_log_sigmoid(s_o) - _log_sigmoid(-s_k).sum()
    g_o = sigmoid(s_o) - 1.0
    g_k = sigmoid(s_k)
    return float(loss), PairGradients(
        d_center=g_o * vo + g_k @ vn,
        d_context=g_o * vc,
        d_negatives=g_k[:, None] * vc[None, :],
    )


# Wichmann-Hill moduli; all intermediates fit comfortably in int64 so the
# compiled kernel and its py_func reference generate identical streams.
_WH1, _WH2, _WH3 = 30269, 30307, 30323


@numba.njit(cache=True, nogil=True, fastmath=True)
def _sgd_shard(walks, win, wout, noise_cum, window, k_neg, lr0, min_lr,
               epochs, s1, s2, s3, total_centers, n_shards):
    n_walks, length = walks.shape
    d = win.shape[1]
    grad_c = np.empty(d)
    neg_ids = np.empty(k_neg, dtype=np.int64)
    neg_g = np.empty(k_neg)
    processed = 0
    for _ in range(epochs):
        for wi in range(n_walks):
            for i in range(length):
                lr = lr0 * (1.0 - (processed * n_shards) / (total_centers + 1.0))
                if lr < min_lr:
                    lr = min_lr
                processed += 1
                c = walks[wi, i]
                lo = i - window
                if lo < 0:
                    lo = 0
                hi = i + window
                if hi > length - 1:
                    hi = length - 1
                for j in range(lo, hi + 1):
                    if j == i:
                        continue
                    o = walks[wi, j]
                    s = 0.0
                    for t in range(d):
                        s += win[c, t] * wout[o, t]
                    if s > 8.0:
                        g_pos = -0.00033535013046647816
                    elif s < -8.0:
                        g_pos = -0.9996646498695336
                    else:
                        g_pos = 1.0 / (1.0 + np.exp(-s)) - 1.0
                    for t in range(d):
                        grad_c[t] = g_pos * wout[o, t]
                    for k in range(k_neg):
                        s1 = (171 * s1) % _WH1
                        s2 = (172 * s2) % _WH2
                        s3 = (170 * s3) % _WH3
                        u = (s1 / _WH1 + s2 / _WH2 + s3 / _WH3) % 1.0
                        n = np.searchsorted(noise_cum, u)
                        if n >= win.shape[0]:
                            n = win.shape[0] - 1
                        s = 0.0
                        for t in range(d):
                            s += win[c, t] * wout[n, t]
                        if s > 8.0:
                            g = 0.9996646498695336
                        elif s < -8.0:
                            g = 0.00033535013046647816
                        else:
                            g = 1.0 / (1.0 + np.exp(-s))
                        for t in range(d):
                            grad_c[t] += g * wout[n, t]
                        neg_ids[k] = n
                        neg_g[k] = g
                    # all gradients are now taken at the pre-update parameters
                    for t in range(d):
                        wout[o, t] -= lr * g_pos * win[c, t]
                    for k in range(k_neg):
                        n = neg_ids[k]
                        g = neg_g[k]
                        for t in range(d):
                            wout[n, t] -= lr * g * win[c, t]
                    for t in range(d):
                        win[c, t] -= lr * grad_c[t]


def _wh_state(seed: int, shard: int):
    words = np.random.SeedSequence([seed, shard]).generate_state(3)
    return (
        int(words[0]) % (_WH1 - 1) + 1,
        int(words[1]) % (_WH2 - 1) + 1,
        int(words[2]) % (_WH3 - 1) + 1,
    )


def noise_cumulative(counts: np.ndarray, exponent: float) -> np.ndarray:
    """Cumulative noise distribution proportional to counts**exponent."""
    weights = counts.astype(np.float64) ** exponent
    weights[counts == 0] = 0.0
    total = weights.sum()
    if total <= 0:
        raise ValueError("corpus has no tokens")
    return np.cumsum(weights) / total


def train_embeddings(corpus: WalkCorpus, cfg: SgnsConfig, jobs: int = 1) -> EmbeddingTable:
    """Train an embedding table on a walk corpus.

    ``jobs > 1`` shards the walks across lock-free workers updating the shared
    tables (last write wins on collisions); ``jobs = 1`` is the sequential
    mode and is reproducible bit for bit.
    """
    if corpus.n_walks == 0:
        raise ValueError("corpus is empty")
    if corpus.n_tokens < 2:
        raise ValueError("token space must contain at least 2 tokens")
    counts = np.bincount(corpus.tokens.ravel(), minlength=corpus.n_tokens)
    cum = noise_cumulative(counts, cfg.noise_exponent)

    rng = np.random.default_rng(cfg.seed)
    win = (rng.random((corpus.n_tokens, cfg.dim)) - 0.5) / cfg.dim
    wout = np.zeros((corpus.n_tokens, cfg.dim))
    total_centers = corpus.n_walks * corpus.walk_length * cfg.epochs

    if jobs <= 1:
        s1, s2, s3 = _wh_state(cfg.seed, 0)
        _sgd_shard(corpus.tokens, win, wout, cum, cfg.window, cfg.negatives,
                   cfg.learning_rate, cfg.min_learning_rate, cfg.epochs,
                   s1, s2, s3, total_centers, 1)
        return EmbeddingTable(win, wout)

    bounds = np.linspace(0, corpus.n_walks, jobs + 1).astype(int)
    threads = []
    for shard in range(jobs):
        chunk = np.ascontiguousarray(corpus.tokens[bounds[shard]:bounds[shard + 1]])
        if chunk.shape[0] == 0:
            continue
        s1, s2, s3 = _wh_state(cfg.seed, shard)
        t = threading.Thread(
            target=_sgd_shard,
            args=(chunk, win, wout, cum, cfg.window, cfg.negatives,
                  cfg.learning_rate, cfg.min_learning_rate, cfg.epochs,
                  s1, s2, s3, total_centers, jobs),
        )
        threads.append(t)
        t.start()
    for t in threads:
        t.join()
    return EmbeddingTable(win, wout)


def write_embeddings(vectors, path) -> None:
    """Text format: header `<token_count> <dim>`, then one 6-decimal row per token.

    Accepts an EmbeddingTable (its input vectors are the embeddings) or a
    plain tokens-by-dim array; only the input side is serialized.
    """
    vectors = np.asarray(getattr(vectors, "input_vectors", vectors))
    with open(path, "w") as f:
        f.write(f"{vectors.shape[0]} {vectors.shape[1]}\n")
        for tid, row in enumerate(vectors):
            f.write(str(tid))
            for x in row:
                f.write(f" {x:.6f}")
            f.write("\n")


def read_embeddings(path) -> np.ndarray:
    with open(path) as f:
        header = f.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: malformed embedding header")
        n, d = int(header[0]), int(header[1])
        out = np.full((n, d), np.nan)
        for line in f:
            parts = line.split()
            if len(parts) != d + 1:
                raise ValueError(f"{path}: malformed embedding row")
            out[int(parts[0])] = [float(x) for x in parts[1:]]
    if np.isnan(out).any():
        raise ValueError(f"{path}: missing token rows")
    return out

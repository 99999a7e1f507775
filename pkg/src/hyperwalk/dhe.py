"""Hyperedge classifier fusing a contextual branch with a permutation-invariant
membership branch, plus an optional feature branch.

The context branch runs the hyperedge embedding through ReLU hidden layers
(width ``hidden_width``) into a narrower ``context_out_width`` output. The
membership branch applies a shared tanh network phi to each member vertex
embedding, sums (which is what makes the representation order-invariant), and
refines the sum with ReLU layers rho. Branch outputs are concatenated and a
fusion stack produces class logits.

Dropout is applied on the context, feature, and fusion hidden layers; the
phi/sum/rho path is kept dropout-free so membership representations stay
exactly permutation-invariant in train mode too.
"""

from __future__ import annotations

import copy
import logging
from dataclasses import dataclass, field, asdict

import numpy as np

from hyperwalk import neural
from hyperwalk.neural import forward_stack, backward_stack, softmax_cross_entropy_batch

log = logging.getLogger("hyperwalk.dhe")

VARIANTS = ("full", "membership_only", "context_only")


@dataclass(frozen=True)
class DheConfig:
    classes: int
    use_features: bool = False
    variant: str = "full"
    j_context_layers: int = 2
    k_rho_layers: int = 2
    l_fusion_layers: int = 2
    m_feature_layers: int = 1
    phi_layers: int = 2
    hidden_width: int = 100
    context_out_width: int = 30
    dropout_rate: float = 0.5
    learning_rate: float = 0.1
    epochs: int = 200
    batch_size: int = 32
    patience: int = 20
    standardize_features: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.classes < 2:
            raise ValueError("classes must be >= 2")
        if self.hidden_width < 1 or self.context_out_width < 1:
            raise ValueError("layer widths must be >= 1")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.phi_layers < 1:
            raise ValueError("phi_layers must be >= 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")


@dataclass
class HyperedgeExample:
    hyperedge_id: int
    member_vertex_ids: np.ndarray
    context_embedding: np.ndarray
    member_embeddings: np.ndarray  # (|e|, member_dim)
    feature_vector: np.ndarray | None
    label: int

    def __post_init__(self):
        if self.member_embeddings.shape[0] != len(self.member_vertex_ids):
            raise ValueError("one member embedding row per member id required")
        if self.member_embeddings.shape[0] == 0:
            raise ValueError("hyperedge has no members")


@dataclass
class DheModel:
    cfg: DheConfig
    context_dim: int
    member_dim: int
    feature_dim: int
    c_net: list = field(default_factory=list)
    phi_net: list = field(default_factory=list)
    rho_net: list = field(default_factory=list)
    feat_net: list = field(default_factory=list)
    fusion_net: list = field(default_factory=list)
    feature_mean: np.ndarray | None = None
    feature_std: np.ndarray | None = None
    label_names: list | None = None

    @property
    def has_context(self) -> bool:
        return self.cfg.variant in ("full", "context_only")

    @property
    def has_membership(self) -> bool:
        return self.cfg.variant in ("full", "membership_only")

    def branch_widths(self):
        widths = []
        if self.has_context:
            widths.append(self.cfg.context_out_width)
        if self.has_membership:
            widths.append(self.rho_net[-1].n_out if self.rho_net else self.phi_net[-1].n_out)
        if self.cfg.use_features:
            widths.append(self.feat_net[-1].n_out if self.feat_net else self.feature_dim)
        return widths


def build_model(cfg: DheConfig, context_dim: int, member_dim: int,
                feature_dim: int = 0, label_names=None) -> DheModel:
    """Initialize all parameter stacks for the configured variant."""
    rng = np.random.default_rng(cfg.seed)
    w = cfg.hidden_width
    model = DheModel(cfg=cfg, context_dim=context_dim, member_dim=member_dim,
                     feature_dim=feature_dim, label_names=label_names)

    if model.has_context:
        dims = [context_dim] + [w] * cfg.j_context_layers + [cfg.context_out_width]
        model.c_net = [neural.init_layer(dims[i], dims[i + 1], "relu", rng) for i in range(len(dims) - 1)]
    if model.has_membership:
        dims = [member_dim] + [w] * cfg.phi_layers
        model.phi_net = [neural.init_layer(dims[i], dims[i + 1], "tanh", rng) for i in range(len(dims) - 1)]
        model.rho_net = [neural.init_layer(w, w, "relu", rng) for _ in range(cfg.k_rho_layers)]
    if cfg.use_features:
        if feature_dim < 1:
            raise ValueError("use_features requires feature_dim >= 1")
        dims = [feature_dim] + [w] * cfg.m_feature_layers
        model.feat_net = [neural.init_layer(dims[i], dims[i + 1], "relu", rng) for i in range(len(dims) - 1)]

    fusion_in = sum(model.branch_widths())
    dims = [fusion_in] + [w] * cfg.l_fusion_layers
    model.fusion_net = [neural.init_layer(dims[i], dims[i + 1], "relu", rng) for i in range(len(dims) - 1)]
    model.fusion_net.append(neural.init_layer(dims[-1], cfg.classes, "identity", rng))

    assert model.fusion_net[0].n_in == sum(model.branch_widths())
    return model


class _BatchCache:
    def __init__(self):
        self.c_cache = None
        self.phi_cache = None
        self.rho_cache = None
        self.feat_cache = None
        self.fusion_cache = None
        self.member_counts = None


def _standardized(model: DheModel, feats: np.ndarray) -> np.ndarray:
    if model.feature_mean is None:
        return feats
    return (feats - model.feature_mean) / model.feature_std


def _forward_batch(model: DheModel, examples, train: bool, rng=None):
    cfg = model.cfg
    cache = _BatchCache()
    parts = []

    if model.has_context:
        xc = np.stack([ex.context_embedding for ex in examples])
        out, cache.c_cache = forward_stack(
            model.c_net, xc, train=train, dropout_rate=cfg.dropout_rate,
            dropout_layers=range(len(model.c_net)), rng=rng)
        parts.append(out)

    if model.has_membership:
        counts = np.array([ex.member_embeddings.shape[0] for ex in examples])
        stacked = np.concatenate([ex.member_embeddings for ex in examples], axis=0)
        phi_out, cache.phi_cache = forward_stack(model.phi_net, stacked, train=train)
        offsets = np.zeros(len(examples), dtype=np.int64)
        np.cumsum(counts[:-1], out=offsets[1:])
        summed = np.add.reduceat(phi_out, offsets, axis=0)
        cache.member_counts = counts
        if model.rho_net:
            out, cache.rho_cache = forward_stack(model.rho_net, summed, train=train)
        else:
            out = summed
        parts.append(out)

    if cfg.use_features:
        feats = _standardized(model, np.stack([ex.feature_vector for ex in examples]))
        if model.feat_net:
            out, cache.feat_cache = forward_stack(
                model.feat_net, feats, train=train, dropout_rate=cfg.dropout_rate,
                dropout_layers=range(len(model.feat_net)), rng=rng)
        else:
            out = feats
        parts.append(out)

    fused = np.concatenate(parts, axis=1)
    n_hidden = len(model.fusion_net) - 1
    logits, cache.fusion_cache = forward_stack(
        model.fusion_net, fused, train=train, dropout_rate=cfg.dropout_rate,
        dropout_layers=range(n_hidden), rng=rng)
    return logits, cache


def _backward_batch(model: DheModel, cache: _BatchCache, grad_logits):
    grads = {}
    g_fused, grads["fusion_net"] = backward_stack(model.fusion_net, cache.fusion_cache, grad_logits)

    widths = model.branch_widths()
    pieces = np.split(g_fused, np.cumsum(widths)[:-1], axis=1)
    i = 0
    if model.has_context:
        _, grads["c_net"] = backward_stack(model.c_net, cache.c_cache, pieces[i])
        i += 1
    if model.has_membership:
        g_m = pieces[i]
        i += 1
        if model.rho_net:
            g_sum, grads["rho_net"] = backward_stack(model.rho_net, cache.rho_cache, g_m)
        else:
            g_sum = g_m
        # the sum broadcasts its gradient to every member row
        g_phi = np.repeat(g_sum, cache.member_counts, axis=0)
        _, grads["phi_net"] = backward_stack(model.phi_net, cache.phi_cache, g_phi)
    if model.cfg.use_features and model.feat_net:
        _, grads["feat_net"] = backward_stack(model.feat_net, cache.feat_cache, pieces[i])
    return grads


def forward(example: HyperedgeExample, model: DheModel) -> np.ndarray:
    """Class probabilities for one hyperedge (eval mode)."""
    if model.cfg.use_features and example.feature_vector is None:
        raise ValueError("model expects a feature vector")
    logits, _ = _forward_batch(model, [example], train=False)
    return neural.softmax(logits[0])


def predict(example: HyperedgeExample, model: DheModel) -> int:
    """Argmax class; ties resolve to the lowest class index."""
    return int(np.argmax(forward(example, model)))


def context_repr(example: HyperedgeExample, model: DheModel) -> np.ndarray:
    if not model.has_context:
        raise ValueError("model has no context branch")
    out, _ = forward_stack(model.c_net, example.context_embedding)
    return out


def membership_repr(example: HyperedgeExample, model: DheModel) -> np.ndarray:
    if not model.has_membership:
        raise ValueError("model has no membership branch")
    phi_out, _ = forward_stack(model.phi_net, example.member_embeddings)
    summed = phi_out.sum(axis=0)
    if model.rho_net:
        out, _ = forward_stack(model.rho_net, summed)
        return out
    return summed


def _all_stacks(model: DheModel):
    return {name: stack for name, stack in
            [("c_net", model.c_net), ("phi_net", model.phi_net), ("rho_net", model.rho_net),
             ("feat_net", model.feat_net), ("fusion_net", model.fusion_net)] if stack}


def _apply_grads(model: DheModel, grads: dict, lr: float) -> None:
    for name, stack_grads in grads.items():
        neural.sgd_step(getattr(model, name), stack_grads, lr)


def evaluate(model: DheModel, examples) -> dict:
    """Eval-mode loss/accuracy/predictions over a list of examples."""
    labels = np.array([ex.label for ex in examples])
    preds = np.empty(len(examples), dtype=np.int64)
    total_loss = 0.0
    bs = max(model.cfg.batch_size, 1)
    for lo in range(0, len(examples), bs):
        chunk = examples[lo:lo + bs]
        logits, _ = _forward_batch(model, chunk, train=False)
        loss, _ = softmax_cross_entropy_batch(logits, labels[lo:lo + bs])
        total_loss += loss * len(chunk)
        preds[lo:lo + bs] = logits.argmax(axis=1)
    return {
        "loss": total_loss / len(examples),
        "accuracy": float((preds == labels).mean()),
        "predictions": preds,
        "labels": labels,
    }


def train_epoch(model: DheModel, examples, rng: np.random.Generator) -> tuple:
    """One pass of minibatch SGD; returns running (loss, accuracy)."""
    cfg = model.cfg
    order = rng.permutation(len(examples))
    loss_sum = 0.0
    correct = 0
    for lo in range(0, len(order), cfg.batch_size):
        batch = [examples[i] for i in order[lo:lo + cfg.batch_size]]
        labels = np.array([ex.label for ex in batch])
        logits, cache = _forward_batch(model, batch, train=True, rng=rng)
        loss, grad_logits = softmax_cross_entropy_batch(logits, labels)
        grads = _backward_batch(model, cache, grad_logits)
        _apply_grads(model, grads, cfg.learning_rate)
        loss_sum += loss * len(batch)
        correct += int((logits.argmax(axis=1) == labels).sum())
    return loss_sum / len(order), correct / len(order)


def train(examples, split, cfg: DheConfig, label_names=None):
    """Train a model on the split's train part; returns (model, history).

    History rows carry running train loss/accuracy and, when the split has a
    validation part, eval-mode validation metrics. With validation present,
    training stops after ``cfg.patience`` epochs without a validation-loss
    improvement and the best-validation parameters are restored.
    """
    by_id = {ex.hyperedge_id: ex for ex in examples}
    train_examples = [by_id[i] for i in split.train_ids]
    val_examples = [by_id[i] for i in split.val_ids] if len(split.val_ids) else []
    if not train_examples:
        raise ValueError("train split is empty")
    labels = np.array([ex.label for ex in train_examples])
    if labels.max() >= cfg.classes:
        raise ValueError("label out of range for configured class count")
    missing = set(range(cfg.classes)) - set(labels.tolist())
    if missing:
        log.warning("classes %s absent from the training split", sorted(missing))

    context_dim = len(train_examples[0].context_embedding) if train_examples[0].context_embedding is not None else 0
    member_dim = train_examples[0].member_embeddings.shape[1]
    feature_dim = len(train_examples[0].feature_vector) if cfg.use_features else 0
    model = build_model(cfg, context_dim, member_dim, feature_dim, label_names=label_names)

    if cfg.use_features and cfg.standardize_features:
        feats = np.stack([ex.feature_vector for ex in train_examples])
        model.feature_mean = feats.mean(axis=0)
        std = feats.std(axis=0)
        std[std == 0.0] = 1.0
        model.feature_std = std

    rng = np.random.default_rng(cfg.seed)
    history = []
    best_val = np.inf
    best_state = None
    stall = 0
    for epoch in range(cfg.epochs):
        train_loss, train_acc = train_epoch(model, train_examples, rng)
        row = {"epoch": epoch, "train_loss": train_loss, "train_accuracy": train_acc}
        if val_examples:
            val = evaluate(model, val_examples)
            row["val_loss"] = val["loss"]
            row["val_accuracy"] = val["accuracy"]
            if val["loss"] < best_val:
                best_val = val["loss"]
                best_state = copy.deepcopy(_all_stacks(model))
                stall = 0
            else:
                stall += 1
        history.append(row)
        if val_examples and stall >= cfg.patience:
            log.info("early stop at epoch %d (no val improvement for %d epochs)", epoch, cfg.patience)
            break
    if best_state is not None:
        for name, stack in best_state.items():
            setattr(model, name, stack)
    return model, history


def make_examples(h, hyperedge_vectors: np.ndarray, vertex_vectors: np.ndarray,
                  labels, features: np.ndarray | None = None):
    """Assemble classifier inputs from a hypergraph and its embedding tables."""
    examples = []
    for e in range(h.n_hyperedges):
        members = h.hyperedges[e]
        examples.append(HyperedgeExample(
            hyperedge_id=e,
            member_vertex_ids=np.asarray(members),
            context_embedding=hyperedge_vectors[e],
            member_embeddings=vertex_vectors[members],
            feature_vector=None if features is None else features[e],
            label=int(labels[e]),
        ))
    return examples


def save_model(path, model: DheModel) -> None:
    meta = {
        "config": asdict(model.cfg),
        "context_dim": model.context_dim,
        "member_dim": model.member_dim,
        "feature_dim": model.feature_dim,
        "label_names": model.label_names,
        "feature_mean": None if model.feature_mean is None else model.feature_mean.tolist(),
        "feature_std": None if model.feature_std is None else model.feature_std.tolist(),
    }
    neural.save_stacks(path, _all_stacks(model), meta)


def load_model(path) -> DheModel:
    stacks, meta = neural.load_stacks(path)
    cfg = DheConfig(**meta["config"])
    model = DheModel(cfg=cfg, context_dim=meta["context_dim"], member_dim=meta["member_dim"],
                     feature_dim=meta["feature_dim"], label_names=meta["label_names"])
    for name in ("c_net", "phi_net", "rho_net", "feat_net", "fusion_net"):
        setattr(model, name, stacks.get(name, []))
    if meta["feature_mean"] is not None:
        model.feature_mean = np.array(meta["feature_mean"])
        model.feature_std = np.array(meta["feature_std"])
    return model

"""Minimal dense-network engine: layer stacks, dropout, softmax loss, backprop, SGD.

Everything operates on batches (rows = examples); 1-D inputs are promoted and
returned in kind. Gradients are exact reverse-mode, which the tests pin down
against finite differences.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass

import numpy as np

ACTIVATIONS = ("relu", "tanh", "identity")


@dataclass
class DenseLayer:
    weights: np.ndarray  # (out, in)
    bias: np.ndarray     # (out,)
    activation: str

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.weights.shape[0] != self.bias.shape[0]:
            raise ValueError("weights/bias shape mismatch")

    @property
    def n_in(self) -> int:
        return self.weights.shape[1]

    @property
    def n_out(self) -> int:
        return self.weights.shape[0]


def init_layer(n_in: int, n_out: int, activation: str, rng: np.random.Generator) -> DenseLayer:
    # scaled-uniform init, bound sqrt(6 / (fan_in + fan_out)); biases zero
    bound = np.sqrt(6.0 / (n_in + n_out))
    w = rng.uniform(-bound, bound, size=(n_out, n_in))
    return DenseLayer(weights=w, bias=np.zeros(n_out), activation=activation)


def _activate(z: np.ndarray, activation: str) -> np.ndarray:
    if activation == "relu":
        return np.maximum(z, 0.0)
    if activation == "tanh":
        return np.tanh(z)
    return z


class StackCache:
    """Forward-pass records needed by backward_stack (one entry per layer)."""

    def __init__(self):
        self.entries = []  # (x_in, z, a, dropout_mask or None)
        self.was_vector = False


def forward_stack(stack, x, train: bool = False, dropout_rate: float = 0.0,
                  dropout_layers=(), rng: np.random.Generator | None = None,
                  fixed_masks: dict | None = None):
    """Run x through the layer stack; returns (output, cache).

    Inverted dropout (scale by 1/(1-rate)) is applied after the activation of
    each layer index in ``dropout_layers``, in train mode only. ``fixed_masks``
    substitutes precomputed masks, keyed by layer index (gradient-check hook).
    """
    cache = StackCache()
    if x.ndim == 1:
        cache.was_vector = True
        x = x[None, :]
    dropout_layers = set(dropout_layers)
    for idx, layer in enumerate(stack):
        if x.shape[1] != layer.n_in:
            raise ValueError(f"layer {idx} expects width {layer.n_in}, got {x.shape[1]}")
        z = x @ layer.weights.T + layer.bias
        a = _activate(z, layer.activation)
        mask = None
        if train and dropout_rate > 0.0 and idx in dropout_layers:
            if fixed_masks is not None and idx in fixed_masks:
                mask = fixed_masks[idx]
            else:
                if rng is None:
                    raise ValueError("dropout in train mode needs an rng")
                mask = (rng.random(a.shape) >= dropout_rate) / (1.0 - dropout_rate)
            a = a * mask
        cache.entries.append((x, z, a, mask))
        x = a
    return (x[0] if cache.was_vector else x), cache


def backward_stack(stack, cache: StackCache, grad_output):
    """Exact gradients for every parameter given d(loss)/d(stack output).

    Returns (grad_input, grads) where grads is a list of (dW, db) aligned with
    the stack. Batch rows are summed; scale grad_output upstream for means.
    """
    g = grad_output[None, :] if cache.was_vector else grad_output
    grads = [None] * len(stack)
    for idx in range(len(stack) - 1, -1, -1):
        x_in, z, a, mask = cache.entries[idx]
        layer = stack[idx]
        if mask is not None:
            g = g * mask
        if layer.activation == "relu":
            g = g * (z > 0.0)
        elif layer.activation == "tanh":
            # a already includes the dropout mask; recompute tanh from z
            g = g * (1.0 - np.tanh(z) ** 2)
        dw = g.T @ x_in
        db = g.sum(axis=0)
        grads[idx] = (dw, db)
        g = g @ layer.weights
    return (g[0] if cache.was_vector else g), grads


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_cross_entropy(logits: np.ndarray, label: int):
    """Per-example loss -log softmax(logits)[label] and its logit gradient."""
    if logits.shape[-1] < 2:
        raise ValueError("need at least 2 classes")
    if not 0 <= label < logits.shape[-1]:
        raise ValueError(f"label {label} out of range for {logits.shape[-1]} classes")
    shifted = logits - logits.max()
    log_z = np.log(np.exp(shifted).sum())
    loss = log_z - shifted[label]
    grad = softmax(logits)
    grad[label] -= 1.0
    return float(loss), grad


def softmax_cross_entropy_batch(logits: np.ndarray, labels: np.ndarray):
    """Mean loss over the batch; gradient already scaled by 1/batch."""
    n, c = logits.shape
    if c < 2:
        raise ValueError("need at least 2 classes")
    if labels.min() < 0 or labels.max() >= c:
        raise ValueError("label out of range")
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1))
    losses = log_z - shifted[np.arange(n), labels]
    grad = softmax(logits)
    grad[np.arange(n), labels] -= 1.0
    return float(losses.mean()), grad / n


def sgd_step(stack, grads, lr: float) -> None:
    """In-place p <- p - lr * g. Non-finite gradients are an error, not clipped."""
    for layer, (dw, db) in zip(stack, grads):
        if not (np.isfinite(dw).all() and np.isfinite(db).all()):
            raise ValueError("non-finite gradient")
        layer.weights -= lr * dw
        layer.bias -= lr * db


CHECKPOINT_VERSION = 1


def save_stacks(path, stacks: dict, meta: dict) -> None:
    """Versioned binary checkpoint of named layer stacks; round-trips bit-exactly."""
    arrays = {"__version__": np.array(CHECKPOINT_VERSION)}
    spec = {"meta": meta, "stacks": {}}
    for name, stack in stacks.items():
        spec["stacks"][name] = [layer.activation for layer in stack]
        for i, layer in enumerate(stack):
            arrays[f"{name}.{i}.w"] = layer.weights
            arrays[f"{name}.{i}.b"] = layer.bias
    arrays["__spec__"] = np.frombuffer(json.dumps(spec, sort_keys=True).encode(), dtype=np.uint8)
    buf = io.BytesIO()
    np.savez(buf, **arrays)
    with open(path, "wb") as f:
        f.write(buf.getvalue())


def load_stacks(path):
    """Returns (stacks, meta) from a checkpoint written by save_stacks."""
    with np.load(path) as data:
        version = int(data["__version__"])
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        spec = json.loads(bytes(data["__spec__"]).decode())
        stacks = {}
        for name, activations in spec["stacks"].items():
            stacks[name] = [
                DenseLayer(weights=data[f"{name}.{i}.w"], bias=data[f"{name}.{i}.b"], activation=act)
                for i, act in enumerate(activations)
            ]
    return stacks, spec["meta"]

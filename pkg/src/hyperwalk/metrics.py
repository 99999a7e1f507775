"""Classification metrics over integer label arrays.

Single-label multiclass only, which makes micro-averaged F1 equal to plain
accuracy; both are reported anyway so result tables stay explicit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray             # rows true class, columns predicted class

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]

    def true_positives(self) -> np.ndarray:
        return np.diagonal(self.counts)

    def predicted_per_class(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    def actual_per_class(self) -> np.ndarray:
        return self.counts.sum(axis=1)


def confusion_matrix(y_true, y_pred, n_classes: int | None = None) -> ConfusionMatrix:
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise ValueError("y_true and y_pred must be 1-D arrays of equal length")
    if y_true.size == 0:
        raise ValueError("no samples")
    if n_classes is None:
        n_classes = int(max(y_true.max(), y_pred.max())) + 1
    if y_true.min() < 0 or y_pred.min() < 0 or max(y_true.max(), y_pred.max()) >= n_classes:
        raise ValueError("labels out of range")
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (y_true, y_pred), 1)
    return ConfusionMatrix(counts)


def accuracy(y_true, y_pred) -> float:
    cm = confusion_matrix(y_true, y_pred)
    return float(cm.true_positives().sum() / cm.counts.sum())


def micro_f1(y_true, y_pred) -> float:
    """Micro-averaged F1. Pooled precision and recall coincide here because
    every sample contributes exactly one prediction, so this equals accuracy."""
    cm = confusion_matrix(y_true, y_pred)
    tp = cm.true_positives().sum()
    fp = cm.counts.sum() - tp
    fn = cm.counts.sum() - tp
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    if precision + recall == 0:
        return 0.0
    return float(2 * precision * recall / (precision + recall))


def macro_f1(y_true, y_pred, n_classes: int | None = None) -> float:
    """Unweighted mean of per-class F1; a class with no true or predicted
    samples contributes 0."""
    cm = confusion_matrix(y_true, y_pred, n_classes)
    tp = cm.true_positives().astype(float)
    predicted = cm.predicted_per_class().astype(float)
    actual = cm.actual_per_class().astype(float)
    f1 = np.zeros(cm.n_classes)
    denom = predicted + actual
    nonzero = denom > 0
    f1[nonzero] = 2 * tp[nonzero] / denom[nonzero]
    return float(f1.mean())


def aggregate_runs(values) -> tuple[float, float]:
    """Mean and sample standard deviation (ddof=1); stddev is 0 for one run."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("no runs to aggregate")
    mean = float(values.mean())
    std = float(values.std(ddof=1)) if values.size > 1 else 0.0
    return mean, std


RESULTS_HEADER = "dataset,split,run,seed,micro_f1,macro_f1,accuracy"


def format_result_row(dataset: str, split_name: str, run: int, seed: int,
                      micro: float, macro: float, acc: float) -> str:
    return f"{dataset},{split_name},{run},{seed},{micro:.6f},{macro:.6f},{acc:.6f}"


def write_results_csv(path, rows) -> None:
    with open(path, "w") as f:
        f.write(RESULTS_HEADER + "\n")
        for row in rows:
            f.write(row + "\n")


def read_results_csv(path):
    """Returns the rows as a list of dicts with numeric fields parsed."""
    with open(path) as f:
        header = f.readline().rstrip("\n")
        if header != RESULTS_HEADER:
            raise ValueError(f"{path}: unexpected header {header!r}")
        rows = []
        for line in f:
            line = line.rstrip("\n")
            if not line:
                continue
            ds, split_name, run, seed, micro, macro, acc = line.split(",")
            rows.append({
                "dataset": ds, "split": split_name, "run": int(run), "seed": int(seed),
                "micro_f1": float(micro), "macro_f1": float(macro), "accuracy": float(acc),
            })
    return rows

"""Stratified cross-validation, confusion matrices, ROC/AUC, comparison grid.

Reducers and standardization are fit on training folds only. Confusion and
ROC are pooled over folds; ROC is one-vs-rest per class. AUC is accumulated in
integer arithmetic so it agrees exactly with Mann-Whitney pair counting.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import classifiers
from .dataset import validate_labels
from .numutil import derive_seed, rng_for
from .selectors import ReducerSpec


def stratified_kfold(labels: np.ndarray, k: int, seed: int) -> list[np.ndarray]:
    """k disjoint covering folds with per-class counts within +-1."""
    labels = validate_labels(labels)
    if k < 2:
        raise ValueError("k must be >= 2")
    counts = np.bincount(labels)[1:]
    if np.any(counts < k):
        raise ValueError(f"every class needs at least k={k} samples")
    folds: list[list[np.ndarray]] = [[] for _ in range(k)]
    for c in range(1, int(labels.max()) + 1):
        idx = rng_for(seed, c).permutation(np.flatnonzero(labels == c))
        for j in range(k):
            folds[j].append(idx[j::k])
    return [np.sort(np.concatenate(parts)) for parts in folds]


def confusion_matrix(y_true: np.ndarray, y_pred: np.ndarray, n_classes: int) -> np.ndarray:
    """Entry (i, j) counts true class i+1 predicted as j+1."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise ValueError("label vectors must have equal length")
    for arr in (y_true, y_pred):
        if arr.size and (arr.min() < 1 or arr.max() > n_classes):
            raise ValueError("labels must lie in 1..C")
    out = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(out, (y_true - 1, y_pred - 1), 1)
    return out


def roc_auc(scores: np.ndarray, positives: np.ndarray) -> tuple[np.ndarray, float]:
    """One-vs-rest ROC sweep and trapezoidal AUC.

    Tied scores collapse into one sweep step (a diagonal segment). The area is
    summed over integer counts, which makes it exactly the Mann-Whitney
    statistic (correct pairs + 0.5 * tied pairs) / (P * N).
    """
    scores = np.asarray(scores, dtype=np.float64)
    positives = np.asarray(positives, dtype=bool)
    if scores.shape != positives.shape or scores.ndim != 1:
        raise ValueError("scores and positives must be equal-length vectors")
    n_pos = int(positives.sum())
    n_neg = int(positives.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise ValueError("need at least one positive and one negative")

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_pos = positives[order]
    points = [(0.0, 0.0)]
    tp = fp = 0
    area_twice = 0  # integer accumulation of sum(dFP * (TP_prev + TP_cur))
    i = 0
    n = scores.size
    while i < n:
        j = i
        group_tp = group_fp = 0
        while j < n and sorted_scores[j] == sorted_scores[i]:
            if sorted_pos[j]:
                group_tp += 1
            else:
                group_fp += 1
            j += 1
        area_twice += group_fp * (tp + tp + group_tp)
        tp += group_tp
        fp += group_fp
        points.append((fp / n_neg, tp / n_pos))
        i = j
    auc = area_twice / (2 * n_pos * n_neg)
    return np.array(points), auc


@dataclass
class EvalReport:
    accuracy: float
    confusion: np.ndarray
    per_class_roc: list[np.ndarray]
    per_class_auc: list[float]
    fold_accuracies: list[float]

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "confusion": [[int(v) for v in row] for row in self.confusion],
            "per_class_auc": [float(a) for a in self.per_class_auc],
            "per_class_roc": [[[float(p), float(t)] for p, t in pts]
                              for pts in self.per_class_roc],
            "fold_accuracies": [float(a) for a in self.fold_accuracies],
        }


def cross_validate(clf_spec: classifiers.ClassifierSpec,
                   reducer_spec: ReducerSpec | None,
                   features: np.ndarray, labels: np.ndarray,
                   k: int, seed: int,
                   reducer_cache: dict | None = None) -> EvalReport:
    """Pooled stratified k-fold evaluation with per-fold reducer fitting."""
    x = np.asarray(features, dtype=np.float64)
    labels = validate_labels(labels)
    n = labels.size
    n_classes = int(labels.max())
    folds = stratified_kfold(labels, k, seed)

    pred = np.zeros(n, dtype=np.int64)
    scores = np.zeros((n, n_classes))
    fold_accuracies: list[float] = []
    for fold_i, test_idx in enumerate(folds):
        train_mask = np.ones(n, dtype=bool)
        train_mask[test_idx] = False
        train_idx = np.flatnonzero(train_mask)

        x_train, x_test = x[train_idx], x[test_idx]
        if reducer_spec is not None and reducer_spec.method != "none":
            key = (reducer_spec.cache_key(), fold_i)
            fitted = None if reducer_cache is None else reducer_cache.get(key)
            if fitted is None:
                fitted, _ = reducer_spec.fit(x_train, labels[train_idx],
                                             run_seed=derive_seed(reducer_spec.seed, fold_i))
                if reducer_cache is not None:
                    reducer_cache[key] = fitted
            x_train = fitted.apply(x_train)
            x_test = fitted.apply(x_test)

        model = classifiers.fit(clf_spec, x_train, labels[train_idx])
        fold_pred, fold_scores = model.predict(x_test)
        pred[test_idx] = fold_pred
        scores[test_idx] = fold_scores
        fold_accuracies.append(float(np.mean(fold_pred == labels[test_idx])))

    confusion = confusion_matrix(labels, pred, n_classes)
    accuracy = float(np.trace(confusion) / n)
    per_class_roc: list[np.ndarray] = []
    per_class_auc: list[float] = []
    for c in range(1, n_classes + 1):
        pts, auc = roc_auc(scores[:, c - 1], labels == c)
        per_class_roc.append(pts)
        per_class_auc.append(auc)
    return EvalReport(accuracy, confusion, per_class_roc, per_class_auc, fold_accuracies)


@dataclass
class ComparisonGrid:
    classifier_kinds: list[str]
    column_labels: list[str]
    accuracies: np.ndarray  # rows x columns

    def to_dict(self) -> dict:
        return {
            "classifiers": list(self.classifier_kinds),
            "columns": list(self.column_labels),
            "accuracies": [[float(v) for v in row] for row in self.accuracies],
        }


def comparison_grid(features: np.ndarray, labels: np.ndarray,
                    reducer_specs: list[ReducerSpec], nf_list: list[int],
                    clf_specs: list[classifiers.ClassifierSpec],
                    k: int, seed: int) -> tuple[ComparisonGrid, dict[tuple[str, str], EvalReport]]:
    """One cross-validation per (classifier, column); reducer fits are shared
    across classifier rows through a per-fold cache."""
    d = np.asarray(features).shape[1]
    columns: list[tuple[str, ReducerSpec | None]] = [(f"none:{d}", None)]
    for spec in reducer_specs:
        for nf in nf_list:
            columns.append((f"{spec.method}:{nf}", replace(spec, nf=nf)))

    cache: dict = {}
    reports: dict[tuple[str, str], EvalReport] = {}
    accuracies = np.zeros((len(clf_specs), len(columns)))
    for row_i, clf in enumerate(clf_specs):
        for col_i, (label, rspec) in enumerate(columns):
            report = cross_validate(clf, rspec, features, labels, k, seed,
                                    reducer_cache=cache)
            reports[(clf.kind, label)] = report
            accuracies[row_i, col_i] = report.accuracy
    grid = ComparisonGrid([c.kind for c in clf_specs], [lbl for lbl, _ in columns],
                          accuracies)
    return grid, reports


# ---------------------------------------------------------------------------
# Report artifacts


def write_confusion_csv(confusion: np.ndarray, path: str) -> None:
    n = confusion.shape[0]
    lines = ["true\\pred," + ",".join(str(c) for c in range(1, n + 1))]
    for i, row in enumerate(confusion, start=1):
        lines.append(f"{i}," + ",".join(str(int(v)) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def roc_svg(points: np.ndarray, auc: float, title: str) -> str:
    """Minimal standalone SVG polyline for one ROC curve."""
    size, margin = 360, 40
    span = size - 2 * margin

    def sx(v: float) -> str:
        return format(margin + v * span, ".2f")

    def sy(v: float) -> str:
        return format(size - margin - v * span, ".2f")

    poly = " ".join(f"{sx(p)},{sy(t)}" for p, t in points)
    return "\n".join([
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">',
        f'<rect x="{margin}" y="{margin}" width="{span}" height="{span}" '
        'fill="white" stroke="black"/>',
        f'<line x1="{sx(0.0)}" y1="{sy(0.0)}" x2="{sx(1.0)}" y2="{sy(1.0)}" '
        'stroke="lightgray" stroke-dasharray="4"/>',
        f'<polyline points="{poly}" fill="none" stroke="crimson" stroke-width="1.5"/>',
        f'<text x="{margin}" y="{margin - 10}" font-size="13">'
        f"{title} (AUC {format(auc, '.4f')})</text>",
        f'<text x="{size // 2 - 60}" y="{size - 8}" font-size="11">false positive rate</text>',
        f'<text x="12" y="{size // 2}" font-size="11" transform="rotate(-90 12 {size // 2})">'
        "true positive rate</text>",
        "</svg>",
    ]) + "\n"


def write_roc_svgs(report: EvalReport, out_dir: str, prefix: str = "roc_class") -> list[str]:
    import os

    paths = []
    for c, (pts, auc) in enumerate(zip(report.per_class_roc, report.per_class_auc), start=1):
        path = os.path.join(out_dir, f"{prefix}_{c}.svg")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(roc_svg(pts, auc, f"class {c} vs rest"))
        paths.append(path)
    return paths

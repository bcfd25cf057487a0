"""Four classifiers with per-class scores: KNN, linear SVM, one-hidden-layer
network, and a random-subspace KNN ensemble.

All models z-score columns with training statistics, break every tie toward
the smallest label index, and are fully determined by (spec, seed, data).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import validate_labels
from .kernels import knn_sqdist, pegasos_train
from .numutil import rng_for, zscore_apply, zscore_fit
from .parallel import parallel_map

KINDS = ("knn", "svm_linear", "shallow_nn", "ensemble_subspace_knn")

_SVM_TAG, _NN_TAG, _ENSEMBLE_TAG = 21, 22, 23


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str = "knn"
    knn_k: int = 3
    svm_lambda: float = 1e-4
    svm_epochs: int = 200
    nn_hidden: int = 20
    nn_learning_rate: float = 0.1
    nn_momentum: float = 0.9
    nn_epochs: int = 500
    ensemble_learners: int = 30
    ensemble_subspace_fraction: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if min(self.knn_k, self.svm_epochs, self.nn_hidden, self.nn_epochs,
               self.ensemble_learners) < 1:
            raise ValueError("counts must be positive")
        if self.svm_lambda <= 0 or self.nn_learning_rate <= 0:
            raise ValueError("svm_lambda and nn_learning_rate must be > 0")
        if not 0.0 <= self.nn_momentum < 1.0:
            raise ValueError("nn_momentum must lie in [0, 1)")
        if not 0.0 < self.ensemble_subspace_fraction <= 1.0:
            raise ValueError("ensemble_subspace_fraction must lie in (0, 1]")


def _check_training_data(features: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    x = np.asarray(features, dtype=np.float64)
    labels = validate_labels(labels)
    if x.ndim != 2 or x.shape[0] != labels.size:
        raise ValueError("features must be 2-D with one row per label")
    n_classes = int(labels.max())
    counts = np.bincount(labels, minlength=n_classes + 1)[1:]
    if np.any(counts < 2):
        raise ValueError("every class needs at least 2 training samples")
    return x, labels, n_classes


def _vote_scores(dist: np.ndarray, train_labels: np.ndarray, k: int,
                 n_classes: int) -> np.ndarray:
    """Neighbor vote fractions per class; distance ties go to the lower row."""
    k = min(k, dist.shape[1])
    neighbors = np.argsort(dist, axis=1, kind="stable")[:, :k]
    votes = train_labels[neighbors]
    scores = np.zeros((dist.shape[0], n_classes))
    for c in range(1, n_classes + 1):
        scores[:, c - 1] = (votes == c).sum(axis=1) / k
    return scores


class KnnModel:
    def __init__(self, spec: ClassifierSpec, features: np.ndarray, labels: np.ndarray):
        x, labels, n_classes = _check_training_data(features, labels)
        self.k = spec.knn_k
        self.n_classes = n_classes
        self.mean, self.std = zscore_fit(x)
        self.z_train = np.ascontiguousarray(zscore_apply(x, self.mean, self.std))
        self.labels = labels

    def predict(self, features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        z = np.ascontiguousarray(zscore_apply(np.asarray(features, dtype=np.float64),
                                              self.mean, self.std))
        if z.shape[1] != self.z_train.shape[1]:
            raise ValueError("feature dimension does not match training data")
        dist = knn_sqdist(z, self.z_train)
        scores = _vote_scores(dist, self.labels, self.k, self.n_classes)
        return np.argmax(scores, axis=1) + 1, scores


class SvmLinearModel:
    """One-vs-rest hinge loss trained by seeded Pegasos-style subgradient descent."""

    def __init__(self, spec: ClassifierSpec, features: np.ndarray, labels: np.ndarray):
        x, labels, n_classes = _check_training_data(features, labels)
        self.n_classes = n_classes
        self.mean, self.std = zscore_fit(x)
        z = zscore_apply(x, self.mean, self.std)
        # bias enters as an appended constant feature so the 1/(lam*t) step
        # stays stable for it
        z = np.ascontiguousarray(np.hstack([z, np.ones((z.shape[0], 1))]))
        n, d = z.shape
        self.weights = np.zeros((n_classes, d))
        for ci in range(n_classes):
            y = np.where(labels == ci + 1, 1.0, -1.0)
            rng = rng_for(spec.seed, _SVM_TAG, ci)
            order = np.concatenate([rng.permutation(n) for _ in range(spec.svm_epochs)])
            self.weights[ci] = pegasos_train(z, y, spec.svm_lambda,
                                             order.astype(np.int64))

    def predict(self, features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        z = zscore_apply(np.asarray(features, dtype=np.float64), self.mean, self.std)
        if z.shape[1] != self.weights.shape[1] - 1:
            raise ValueError("feature dimension does not match training data")
        z = np.hstack([z, np.ones((z.shape[0], 1))])
        scores = z @ self.weights.T
        return np.argmax(scores, axis=1) + 1, scores


# --- shallow network internals (exposed for the gradient check) ------------


def nn_init(rng: np.random.Generator, d: int, hidden: int,
            n_classes: int) -> dict[str, np.ndarray]:
    """Symmetric uniform init scaled by 1/sqrt(fan_in); zero biases."""
    s1 = 1.0 / np.sqrt(d)
    s2 = 1.0 / np.sqrt(hidden)
    return {
        "w1": rng.uniform(-s1, s1, (d, hidden)),
        "b1": np.zeros(hidden),
        "w2": rng.uniform(-s2, s2, (hidden, n_classes)),
        "b2": np.zeros(n_classes),
    }


def nn_forward(params: dict[str, np.ndarray], z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    hidden = np.tanh(z @ params["w1"] + params["b1"])
    logits = hidden @ params["w2"] + params["b2"]
    return hidden, logits


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def nn_loss_and_grad(params: dict[str, np.ndarray], z: np.ndarray,
                     onehot: np.ndarray) -> tuple[float, dict[str, np.ndarray]]:
    """Mean cross-entropy (via logsumexp) and its analytic gradient."""
    n = z.shape[0]
    hidden, logits = nn_forward(params, z)
    shifted = logits - logits.max(axis=1, keepdims=True)
    logsumexp = np.log(np.exp(shifted).sum(axis=1)) + logits.max(axis=1)
    loss = float(np.mean(logsumexp - (logits * onehot).sum(axis=1)))
    delta = (_softmax(logits) - onehot) / n
    grad_w2 = hidden.T @ delta
    grad_b2 = delta.sum(axis=0)
    back = (delta @ params["w2"].T) * (1.0 - hidden ** 2)
    grad_w1 = z.T @ back
    grad_b1 = back.sum(axis=0)
    return loss, {"w1": grad_w1, "b1": grad_b1, "w2": grad_w2, "b2": grad_b2}


class ShallowNnModel:
    """One tanh hidden layer, softmax output, full-batch momentum descent."""

    def __init__(self, spec: ClassifierSpec, features: np.ndarray, labels: np.ndarray):
        x, labels, n_classes = _check_training_data(features, labels)
        self.n_classes = n_classes
        self.mean, self.std = zscore_fit(x)
        z = zscore_apply(x, self.mean, self.std)
        onehot = np.where(labels[:, None] == np.arange(1, n_classes + 1)[None, :], 1.0, 0.0)
        params = nn_init(rng_for(spec.seed, _NN_TAG), z.shape[1], spec.nn_hidden, n_classes)
        velocity = {k: np.zeros_like(v) for k, v in params.items()}
        for _ in range(spec.nn_epochs):
            _, grads = nn_loss_and_grad(params, z, onehot)
            for k in params:
                velocity[k] = spec.nn_momentum * velocity[k] - spec.nn_learning_rate * grads[k]
                params[k] = params[k] + velocity[k]
        self.params = params

    def predict(self, features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        z = zscore_apply(np.asarray(features, dtype=np.float64), self.mean, self.std)
        if z.shape[1] != self.params["w1"].shape[0]:
            raise ValueError("feature dimension does not match training data")
        _, logits = nn_forward(self.params, z)
        scores = _softmax(logits)
        return np.argmax(scores, axis=1) + 1, scores


class EnsembleSubspaceKnnModel:
    """KNN learners on seeded random feature subsets; scores = mean vote fractions."""

    def __init__(self, spec: ClassifierSpec, features: np.ndarray, labels: np.ndarray):
        x, labels, n_classes = _check_training_data(features, labels)
        self.k = spec.knn_k
        self.n_classes = n_classes
        self.mean, self.std = zscore_fit(x)
        self.z_train = zscore_apply(x, self.mean, self.std)
        self.labels = labels
        d = x.shape[1]
        size = int(np.clip(round(spec.ensemble_subspace_fraction * d), 1, d))
        self.subspaces = [
            np.sort(rng_for(spec.seed, _ENSEMBLE_TAG, li).choice(d, size, replace=False))
            for li in range(spec.ensemble_learners)
        ]

    def predict(self, features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        z = zscore_apply(np.asarray(features, dtype=np.float64), self.mean, self.std)
        if z.shape[1] != self.z_train.shape[1]:
            raise ValueError("feature dimension does not match training data")

        def learner_scores(subspace: np.ndarray) -> np.ndarray:
            dist = knn_sqdist(np.ascontiguousarray(z[:, subspace]),
                              np.ascontiguousarray(self.z_train[:, subspace]))
            return _vote_scores(dist, self.labels, self.k, self.n_classes)

        all_scores = parallel_map(learner_scores, self.subspaces)
        scores = np.zeros((z.shape[0], self.n_classes))
        for s in all_scores:
            scores += s
        scores /= len(self.subspaces)
        return np.argmax(scores, axis=1) + 1, scores


_MODELS = {
    "knn": KnnModel,
    "svm_linear": SvmLinearModel,
    "shallow_nn": ShallowNnModel,
    "ensemble_subspace_knn": EnsembleSubspaceKnnModel,
}


def fit(spec: ClassifierSpec, features: np.ndarray, labels: np.ndarray):
    return _MODELS[spec.kind](spec, features, labels)


def nn_gradient_check(spec: ClassifierSpec, features: np.ndarray,
                      labels: np.ndarray, step: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients."""
    x, labels, n_classes = _check_training_data(features, labels)
    mean, std = zscore_fit(x)
    z = zscore_apply(x, mean, std)
    onehot = np.where(labels[:, None] == np.arange(1, n_classes + 1)[None, :], 1.0, 0.0)
    params = nn_init(rng_for(spec.seed, _NN_TAG), z.shape[1], spec.nn_hidden, n_classes)
    _, grads = nn_loss_and_grad(params, z, onehot)
    worst = 0.0
    for key in params:
        flat = params[key].ravel()
        grad_flat = grads[key].ravel()
        for idx in range(flat.size):
            keep = flat[idx]
            flat[idx] = keep + step
            up, _ = nn_loss_and_grad(params, z, onehot)
            flat[idx] = keep - step
            down, _ = nn_loss_and_grad(params, z, onehot)
            flat[idx] = keep
            numeric = (up - down) / (2.0 * step)
            denom = max(abs(numeric) + abs(grad_flat[idx]), 1e-8)
            worst = max(worst, abs(numeric - grad_flat[idx]) / denom)
    return worst

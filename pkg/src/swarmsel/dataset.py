"""Dataset plumbing: synthetic gratings, image manifests, feature CSV, splits."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter

from .numutil import rng_for


@dataclass(frozen=True)
class SynthConfig:
    """Synthetic stand-in dataset: one oriented grating texture per class."""

    n_classes: int = 5
    samples_per_class: int = 200
    image_size: int = 64
    noise_sigma: float = 1.8
    blur_sigma: float = 0.8
    seed: int = 42

    def __post_init__(self) -> None:
        if self.n_classes < 2:
            raise ValueError("n_classes must be >= 2")
        if self.samples_per_class < 2:
            raise ValueError("samples_per_class must be >= 2")
        if self.image_size < 3:
            raise ValueError("image_size must be >= 3")
        if self.noise_sigma < 0 or self.blur_sigma < 0:
            raise ValueError("sigmas must be non-negative")


@dataclass
class FeatureMatrix:
    values: np.ndarray
    ids: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("feature values must be a 2-D matrix")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature values must be finite")
        if not self.ids:
            self.ids = [str(i) for i in range(self.values.shape[0])]
        if len(self.ids) != self.values.shape[0]:
            raise ValueError("ids length must match the number of rows")


def validate_labels(labels: np.ndarray) -> np.ndarray:
    """Check integer labels 1..C with every class present; returns int64 array."""
    arr = np.asarray(labels)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("labels must be a non-empty vector")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(arr == np.floor(arr)):
            raise ValueError("labels must be integers")
    arr = arr.astype(np.int64)
    c = int(arr.max())
    if arr.min() < 1 or c < 2:
        raise ValueError("labels must cover classes 1..C with C >= 2")
    counts = np.bincount(arr, minlength=c + 1)[1:]
    if np.any(counts == 0):
        raise ValueError("every class 1..C needs at least one sample")
    return arr


def synth_generate(cfg: SynthConfig) -> tuple[np.ndarray, np.ndarray]:
    """Generate (images, labels): one grating per sample, fully seeded.

    Class c uses orientation pi*(c-1)/C and frequency (2+c) cycles/image with
    a random per-sample phase; pixel noise then Gaussian blur are applied and
    the result is clipped to [0, 1]. Sample i draws from its own RNG stream
    (seed, i), so generation order cannot change the data.
    """
    size = cfg.image_size
    cols, rows = np.meshgrid(np.arange(size), np.arange(size))
    n_total = cfg.n_classes * cfg.samples_per_class
    images = np.empty((n_total, size, size))
    labels = np.empty(n_total, dtype=np.int64)
    for i in range(n_total):
        c = i // cfg.samples_per_class + 1
        theta = np.pi * (c - 1) / cfg.n_classes
        freq = 2.0 + c
        rng = rng_for(cfg.seed, i)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        wave = 2.0 * np.pi * freq * (cols * np.cos(theta) + rows * np.sin(theta)) / size
        img = 0.5 + 0.5 * np.sin(wave + phase)
        if cfg.noise_sigma > 0:
            img = img + rng.normal(0.0, cfg.noise_sigma, (size, size))
        if cfg.blur_sigma > 0:
            img = gaussian_filter(img, cfg.blur_sigma)
        images[i] = np.clip(img, 0.0, 1.0)
        labels[i] = c
    return images, labels


def load_manifest(path: str) -> list[tuple[str, int]]:
    """Read a "path,label" CSV; relative paths resolve against the manifest dir."""
    base = os.path.dirname(os.path.abspath(path))
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ValueError(f"cannot read manifest {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["path", "label"]:
            raise ValueError(f"{path}: manifest header must be 'path,label'")
        entries: list[tuple[str, int]] = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 columns")
            rel, raw_label = row[0].strip(), row[1].strip()
            try:
                label = int(raw_label)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: label {raw_label!r} is not an integer") from None
            if label < 1:
                raise ValueError(f"{path}:{lineno}: labels are 1-based, got {label}")
            resolved = rel if os.path.isabs(rel) else os.path.join(base, rel)
            entries.append((resolved, label))
    if not entries:
        raise ValueError(f"{path}: manifest has no data rows")
    return entries


def features_write(matrix: FeatureMatrix, labels: np.ndarray, path: str) -> None:
    """Persist features as CSV with header id,label,f0..f{D-1} (LF endings)."""
    labels = validate_labels(labels)
    if labels.size != matrix.values.shape[0]:
        raise ValueError("labels length must match feature rows")
    d = matrix.values.shape[1]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "label"] + [f"f{j}" for j in range(d)])
        for i in range(matrix.values.shape[0]):
            row = [matrix.ids[i], str(int(labels[i]))]
            row += [repr(float(v)) for v in matrix.values[i]]
            writer.writerow(row)


def features_read(path: str) -> tuple[FeatureMatrix, np.ndarray]:
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ValueError(f"cannot read features {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[:2] != ["id", "label"]:
            raise ValueError(f"{path}: feature CSV header must start with id,label")
        d = len(header) - 2
        if d < 1 or header[2:] != [f"f{j}" for j in range(d)]:
            raise ValueError(f"{path}: feature columns must be f0..f{{D-1}}")
        ids: list[str] = []
        labels: list[int] = []
        rows: list[list[float]] = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != d + 2:
                raise ValueError(f"{path}:{lineno}: expected {d + 2} columns, got {len(row)}")
            ids.append(row[0])
            try:
                labels.append(int(row[1]))
                rows.append([float(v) for v in row[2:]])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: malformed numeric value") from None
    if not rows:
        raise ValueError(f"{path}: no feature rows")
    matrix = FeatureMatrix(np.array(rows), ids)
    return matrix, validate_labels(np.array(labels))


def stratified_split(labels: np.ndarray, test_fraction: float,
                     seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded per-class holdout split; both sides keep every class non-empty."""
    labels = validate_labels(labels)
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    train: list[np.ndarray] = []
    test: list[np.ndarray] = []
    for c in range(1, int(labels.max()) + 1):
        idx = np.flatnonzero(labels == c)
        if idx.size < 2:
            raise ValueError(f"class {c} needs at least 2 samples to split")
        perm = rng_for(seed, c).permutation(idx)
        n_test = int(np.clip(round(idx.size * test_fraction), 1, idx.size - 1))
        test.append(perm[:n_test])
        train.append(perm[n_test:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))

"""Shared numeric helpers: keyed RNG streams, z-scoring, deterministic eigendecomposition."""

from __future__ import annotations

import numpy as np


def rng_for(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for (seed, key); parallel and serial schedules agree."""
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


def derive_seed(seed: int, *key: int) -> int:
    """Collapse (seed, key) into a fresh non-negative integer seed."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint32)[0])


def zscore_fit(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-column mean and population std (ddof=0)."""
    x = np.asarray(x, dtype=np.float64)
    return x.mean(axis=0), x.std(axis=0)


def zscore_apply(x: np.ndarray, mean: np.ndarray, std: np.ndarray) -> np.ndarray:
    """Standardize columns; zero-variance columns map to all-zero."""
    x = np.asarray(x, dtype=np.float64)
    safe = np.where(std > 0.0, std, 1.0)
    z = (x - mean) / safe
    z[:, std == 0.0] = 0.0
    return z


def eigh_descending(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric eigendecomposition with a reproducible convention.

    Eigenvalues come out descending (stable order on ties) and each
    eigenvector's first component of visible magnitude is made positive.
    Exactly diagonal input short-circuits to axis-aligned eigenvectors so a
    degenerate spectrum cannot be rotated by summation noise.
    """
    a = np.asarray(a, dtype=np.float64)
    diag = np.diagonal(a)
    if np.count_nonzero(a - np.diag(diag)) == 0:
        vals = diag.astype(np.float64).copy()
        vecs = np.eye(a.shape[0])
    else:
        vals, vecs = np.linalg.eigh(a)
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order].copy()
    for j in range(vecs.shape[1]):
        nz = np.flatnonzero(np.abs(vecs[:, j]) > 1e-12)
        if nz.size and vecs[nz[0], j] < 0:
            vecs[:, j] = -vecs[:, j]
    return vals, vecs

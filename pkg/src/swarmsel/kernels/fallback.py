"""Pure-numpy kernels.

Accumulation orders (window taps, feature index, training steps) mirror the
compiled extension element for element, so both backends produce bit-identical
floating point results for lpq_responses and knn_sqdist.
"""

from __future__ import annotations

import numpy as np


def lpq_responses(img: np.ndarray, kre: np.ndarray, kim: np.ndarray) -> np.ndarray:
    """Valid-region correlation of img with 4 complex kernels.

    Returns (H-M+1, W-M+1, 8) planes ordered [re0..re3, im0..im3]. The window
    center value is subtracted from every tap, so constant patches yield
    exactly zero responses (the kernels sum to zero analytically).
    """
    n_freq, m, _ = kre.shape
    h, w = img.shape
    ho, wo = h - m + 1, w - m + 1
    r = (m - 1) // 2
    center = img[r:r + ho, r:r + wo]
    out = np.zeros((ho, wo, 2 * n_freq))
    for dy in range(m):
        for dx in range(m):
            d = img[dy:dy + ho, dx:dx + wo] - center
            for f in range(n_freq):
                out[:, :, f] += d * kre[f, dy, dx]
                out[:, :, n_freq + f] += d * kim[f, dy, dx]
    return out


def knn_sqdist(queries: np.ndarray, train: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances, accumulated feature by feature."""
    nq, d = queries.shape
    nt = train.shape[0]
    out = np.zeros((nq, nt))
    for j in range(d):
        diff = queries[:, j, None] - train[None, :, j]
        out += diff * diff
    return out


def pegasos_train(z: np.ndarray, y: np.ndarray, lam: float,
                  order: np.ndarray) -> np.ndarray:
    """Hinge-loss subgradient descent with step 1/(lam*t).

    `order` is the full precomputed visiting sequence (epochs * n indices).
    The caller appends a constant column when it wants a bias term.
    """
    n, d = z.shape
    w = np.zeros(d)
    t = 0
    for idx in order:
        t += 1
        eta = 1.0 / (lam * t)
        zi = z[idx]
        yi = float(y[idx])
        decay = 1.0 - eta * lam
        if yi * float(zi @ w) < 1.0:
            w = w * decay + (eta * yi) * zi
        else:
            w = w * decay
    return w

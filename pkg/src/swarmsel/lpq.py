"""Local phase quantization features.

Per pixel, four complex short-term Fourier coefficients are taken over an MxM
window at the low frequencies (a,0), (0,a), (a,a), (a,-a) with a = 1/M. The
signs of the stacked [Re, Im] parts form an 8-bit code; codes are histogrammed
into a 256-bin, L1-normalized feature vector. Optional decorrelation whitens
the 8-vector with a fixed matrix derived from a rho-parameterized pixel
covariance model before quantization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import lpq_responses
from .numutil import eigh_descending

N_CODES = 256


@dataclass(frozen=True)
class LpqConfig:
    window_size: int = 7
    decorrelate: bool = False
    rho: float = 0.9

    def __post_init__(self) -> None:
        m = self.window_size
        if m < 3 or m > 15 or m % 2 == 0:
            raise ValueError("window_size must be odd and within 3..15")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must lie in [0, 1)")

    @property
    def alpha(self) -> float:
        return 1.0 / self.window_size


def stft_filters(cfg: LpqConfig) -> np.ndarray:
    """The four complex MxM kernels, entry exp(-2*pi*i*(u . x)) at offset x.

    Kernel k has frequency u_k from {(a,0), (0,a), (a,a), (a,-a)}; x runs over
    [-(M-1)/2, (M-1)/2]^2 with x = (dx, dy).
    """
    m = cfg.window_size
    offsets = np.arange(m) - (m - 1) // 2
    e = np.exp(-2j * np.pi * cfg.alpha * offsets)
    ones = np.ones(m)
    k1 = np.outer(ones, e)          # u = (a, 0)
    k2 = np.outer(e, ones)          # u = (0, a)
    k3 = np.outer(e, e)             # u = (a, a)
    k4 = np.outer(np.conj(e), e)    # u = (a, -a)
    return np.stack([k1, k2, k3, k4])


def whitening_matrix(cfg: LpqConfig) -> np.ndarray:
    """Fixed 8x8 decorrelation matrix for the [Re u1..u4, Im u1..u4] vector.

    The coefficient covariance is B C B^T where B stacks the kernels'
    real/imaginary parts and C is the pixel covariance rho^distance. Rows are
    the eigenvectors, descending eigenvalue, first visible component positive.
    """
    m = cfg.window_size
    filters = stft_filters(cfg)
    basis = np.concatenate([filters.real.reshape(4, -1), filters.imag.reshape(4, -1)])
    if cfg.rho == 0.0:
        # pixel covariance is exactly the identity and the kernels form an
        # orthogonal DFT family, so B B^T = (M^2/2) I analytically; building it
        # directly keeps the degenerate eigenspace axis-aligned.
        cov = (m * m / 2.0) * np.eye(8)
    else:
        grid = np.stack(np.meshgrid(np.arange(m), np.arange(m), indexing="ij"), -1)
        pos = grid.reshape(-1, 2).astype(np.float64)
        dist = np.sqrt(((pos[:, None, :] - pos[None, :, :]) ** 2).sum(-1))
        cov = basis @ (cfg.rho ** dist) @ basis.T
        cov = (cov + cov.T) / 2.0
    _, vecs = eigh_descending(cov)
    return vecs.T


def lpq_codes(img: np.ndarray, cfg: LpqConfig) -> np.ndarray:
    """8-bit phase-sign codes for every valid (interior) pixel.

    Bit j is 1 iff component j of the (optionally whitened) response vector is
    >= 0; the output has shape (H-M+1, W-M+1), dtype uint8.
    """
    arr = np.ascontiguousarray(np.asarray(img, dtype=np.float64))
    m = cfg.window_size
    if arr.ndim != 2 or arr.shape[0] < m or arr.shape[1] < m:
        raise ValueError(f"image must be at least {m}x{m}")
    filters = stft_filters(cfg)
    resp = lpq_responses(
        arr,
        np.ascontiguousarray(filters.real),
        np.ascontiguousarray(filters.imag),
    )
    if cfg.decorrelate:
        resp = resp @ whitening_matrix(cfg).T
    bits = resp >= 0.0
    codes = bits @ (1 << np.arange(8, dtype=np.int64))
    return codes.astype(np.uint8)


def lpq_histogram(codes: np.ndarray) -> np.ndarray:
    """256-bin count histogram of a code image, L1-normalized."""
    arr = np.asarray(codes)
    if arr.size == 0:
        raise ValueError("empty code image")
    counts = np.bincount(arr.ravel().astype(np.int64), minlength=N_CODES)
    return counts / arr.size


def extract(img: np.ndarray, cfg: LpqConfig) -> np.ndarray:
    """Full descriptor: histogram of the code image."""
    return lpq_histogram(lpq_codes(img, cfg))

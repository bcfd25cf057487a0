"""Grayscale images in [0,1] and the four-step preprocessing chain.

Pipeline order: gray conversion, intensity adjustment, histogram equalization,
resize. Every operation is a pure function returning a new array and keeps
pixels finite in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image

# ITU-R BT.601 luma weights
GRAY_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class PreprocessConfig:
    target_width: int = 64
    target_height: int = 64
    low_percentile: float = 0.01
    high_percentile: float = 0.99
    equalize_bins: int = 256

    def __post_init__(self) -> None:
        if self.target_width < 1 or self.target_height < 1:
            raise ValueError("target dimensions must be at least 1x1")
        if not (0.0 <= self.low_percentile < self.high_percentile <= 1.0):
            raise ValueError("need 0 <= low_percentile < high_percentile <= 1")
        if self.equalize_bins < 2:
            raise ValueError("equalize_bins must be >= 2")


def as_gray(img: np.ndarray) -> np.ndarray:
    """Validate and return a 2-D float64 view of a grayscale image."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("grayscale image must be a non-empty 2-D array")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains non-finite pixels")
    return arr


def to_gray(img: np.ndarray) -> np.ndarray:
    """Luminosity gray conversion; already-gray input passes through unchanged."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 2:
        return as_gray(arr)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError("expected (H, W) gray or (H, W, 3) rgb array")
    wr, wg, wb = GRAY_WEIGHTS
    gray = wr * arr[:, :, 0] + wg * arr[:, :, 1] + wb * arr[:, :, 2]
    return np.clip(gray, 0.0, 1.0)


def adjust_intensity(img: np.ndarray, cfg: PreprocessConfig) -> np.ndarray:
    """Linear stretch mapping the low/high percentile values to 0 and 1.

    Values outside the percentile window are clipped; a zero-range (constant)
    image maps to all zeros.
    """
    arr = as_gray(img)
    lo, hi = np.quantile(arr, [cfg.low_percentile, cfg.high_percentile])
    if hi <= lo:
        return np.zeros_like(arr)
    return np.clip((arr - lo) / (hi - lo), 0.0, 1.0)


def equalize_hist(img: np.ndarray, bins: int) -> np.ndarray:
    """CDF remap on `bins` quantization levels, rescaled to span [0, 1]."""
    if bins < 2:
        raise ValueError("bins must be >= 2")
    arr = as_gray(img)
    levels = np.minimum((arr * bins).astype(np.int64), bins - 1)
    counts = np.bincount(levels.ravel(), minlength=bins)
    cdf = np.cumsum(counts) / arr.size
    mapped = cdf[levels]
    cdf_min = mapped.min()
    if cdf_min >= 1.0:
        # single occupied bin: constant image stays constant
        return np.zeros_like(arr)
    return (mapped - cdf_min) / (1.0 - cdf_min)


def _sample_coords(n_src: int, n_out: int) -> np.ndarray:
    # corner-aligned: first/last output samples coincide with the source corners
    if n_out == 1:
        return np.array([(n_src - 1) / 2.0])
    return np.arange(n_out) * ((n_src - 1) / (n_out - 1))


def resize_bilinear(img: np.ndarray, width: int, height: int) -> np.ndarray:
    """Bilinear resize on a corner-aligned sample grid."""
    if width < 1 or height < 1:
        raise ValueError("target dimensions must be at least 1x1")
    src = as_gray(img)
    sh, sw = src.shape
    xs = _sample_coords(sw, width)
    ys = _sample_coords(sh, height)
    x0 = np.minimum(np.floor(xs).astype(np.int64), sw - 1)
    y0 = np.minimum(np.floor(ys).astype(np.int64), sh - 1)
    x1 = np.minimum(x0 + 1, sw - 1)
    y1 = np.minimum(y0 + 1, sh - 1)
    fx = (xs - x0)[None, :]
    fy = (ys - y0)[:, None]
    top = src[np.ix_(y0, x0)] * (1.0 - fx) + src[np.ix_(y0, x1)] * fx
    bot = src[np.ix_(y1, x0)] * (1.0 - fx) + src[np.ix_(y1, x1)] * fx
    out = top * (1.0 - fy) + bot * fy
    # convex combination: clamp float overshoot so output stays inside the input range
    return np.clip(out, src.min(), src.max())


def preprocess(img: np.ndarray, cfg: PreprocessConfig) -> np.ndarray:
    """Intensity adjustment, histogram equalization, resize — in that order."""
    out = adjust_intensity(img, cfg)
    out = equalize_hist(out, cfg.equalize_bins)
    return resize_bilinear(out, cfg.target_width, cfg.target_height)


# ---------------------------------------------------------------------------
# File I/O: 8-bit gray/RGB PNG, 16-bit gray PNG (depth), binary PGM (P5).


def _read_pgm(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise ValueError(f"{path}: not a binary PGM (P5) file")

    pos = 2
    fields: list[int] = []
    while len(fields) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        token = data[start:pos]
        if not token.isdigit():
            raise ValueError(f"{path}: malformed PGM header")
        fields.append(int(token))
    pos += 1  # single whitespace after maxval
    width, height, maxval = fields
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise ValueError(f"{path}: invalid PGM dimensions or maxval")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = width * height
    pixels = np.frombuffer(data, dtype=dtype, count=count, offset=pos)
    if pixels.size != count:
        raise ValueError(f"{path}: truncated PGM pixel data")
    return pixels.reshape(height, width).astype(np.float64) / float(maxval)


def write_pgm(img: np.ndarray, path: str) -> None:
    """Write an 8-bit binary PGM; pixels are rounded from [0,1] to 0..255."""
    arr = as_gray(img)
    quant = np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(quant.tobytes())


def _read_with_pillow(path: str) -> np.ndarray:
    with Image.open(path) as handle:
        mode = handle.mode
        if mode == "L":
            return np.asarray(handle, dtype=np.float64) / 255.0
        if mode == "RGB":
            return to_gray(np.asarray(handle, dtype=np.float64) / 255.0)
        if mode in ("I", "I;16"):
            # 16-bit depth frames treated as a gray channel
            return np.asarray(handle, dtype=np.float64) / 65535.0
        raise ValueError(f"{path}: unsupported image mode {mode!r}")


def load_image(path: str) -> np.ndarray:
    """Load a PNG or binary PGM as a gray image scaled into [0, 1]."""
    try:
        with open(path, "rb") as fh:
            magic = fh.read(2)
    except OSError as exc:
        raise ValueError(f"cannot read image {path}: {exc}") from exc
    if magic == b"P5":
        img = _read_pgm(path)
    else:
        try:
            img = _read_with_pillow(path)
        except ValueError:
            raise
        except Exception as exc:
            raise ValueError(f"cannot decode image {path}: {exc}") from exc
    return np.clip(as_gray(img), 0.0, 1.0)

"""Color reduction: k-means palettes, the smoothed variants, bit-depth cut.

Variants:
  plain_kmeans      fit on every pixel, repaint
  gk_means          Gaussian blur (size 5) first
  fast_gk_means     blur, fit the palette on a stride subsample, repaint all
  adaptive_gk       adaptive Gaussian smoothing first
  fast_adaptive_gk  adaptive smoothing + subsampled palette fit

Fitting is deterministic given (pixel order, k, seed): seeded k-means++
start, Lloyd updates with exact integer channel sums, ties to the lowest
centroid index, empty clusters reseeded to the worst-assigned point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import assign_labels
from .raster import Raster, to_u8
from .smooth import KernelBank, adaptive_gaussian, gaussian_blur

VARIANTS = (
    "plain_kmeans",
    "gk_means",
    "fast_gk_means",
    "adaptive_gk",
    "fast_adaptive_gk",
)
_SMOOTH_SIZE = 5  # fixed blur for the gk variants
MAX_COLORS = 256


@dataclass(frozen=True)
class Palette:
    colors: np.ndarray
    k: int
    inertia: float
    seed: int
    history: tuple[float, ...] = ()


@dataclass(frozen=True)
class QuantizeConfig:
    k: int = 128
    variant: str = "plain_kmeans"
    sample_stride: int = 4
    seed: int = 0
    max_iters: int = 30
    tol: float = 1e-3

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if not (1 <= self.k <= MAX_COLORS):
            raise ValueError(f"k must be in 1..{MAX_COLORS}, got {self.k}")
        if self.sample_stride < 1:
            raise ValueError("sample_stride must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol < 0:
            raise ValueError("tol must be non-negative")


def _plusplus_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]), dtype=np.float64)
    centroids[0] = points[rng.integers(n)]
    d2 = ((points - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            pick = int(rng.integers(n))
        else:
            pick = int(rng.choice(n, p=d2 / total))
        centroids[j] = points[pick]
        d2 = np.minimum(d2, ((points - centroids[j]) ** 2).sum(axis=1))
    return centroids


def kmeans_fit(
    pixels: np.ndarray,
    k: int,
    seed: int = 0,
    max_iters: int = 30,
    tol: float = 1e-3,
) -> Palette:
    """Seeded k-means++ plus Lloyd iterations over color vectors."""
    points = np.asarray(pixels, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    if points.ndim != 2 or points.shape[0] == 0:
        raise ValueError("pixels must be a non-empty (n, channels) array")
    if not (1 <= k <= MAX_COLORS):
        raise ValueError(f"k must be in 1..{MAX_COLORS}, got {k}")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")

    n = points.shape[0]
    rng = np.random.default_rng(seed)
    centroids = _plusplus_init(points, k, rng)
    history: list[float] = []

    for _ in range(max_iters):
        labels, d2 = assign_labels(points, centroids)
        history.append(float(d2.sum()))
        counts = np.bincount(labels, minlength=k)
        sums = np.zeros_like(centroids)
        np.add.at(sums, labels, points)  # exact: integer-valued float64 inputs
        new = centroids.copy()
        nonempty = counts > 0
        new[nonempty] = sums[nonempty] / counts[nonempty, None]
        if not nonempty.all():
            worst = d2.copy()
            for j in np.flatnonzero(~nonempty):
                far = int(np.argmax(worst))
                new[j] = points[far]
                worst[far] = -1.0
        shift = float(((new - centroids) ** 2).sum(axis=1).max())
        centroids = new
        if shift < tol:
            break

    _, d2 = assign_labels(points, centroids)
    inertia = float(d2.sum())
    history.append(inertia)
    return Palette(
        colors=centroids, k=k, inertia=inertia, seed=seed, history=tuple(history)
    )


def apply_palette(img: Raster, palette: Palette) -> Raster:
    """Repaint every pixel with its nearest palette color."""
    if palette.colors.shape[1] != img.channels:
        raise ValueError(
            f"palette has {palette.colors.shape[1]} channels, image has {img.channels}"
        )
    flat = img.data.reshape(-1, img.channels)
    uniq, inverse = np.unique(flat, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    labels, _ = assign_labels(uniq.astype(np.float64), palette.colors)
    lut = to_u8(palette.colors)
    out = lut[labels][inverse].reshape(img.data.shape)
    return Raster(out, img.colorspace)


def _fit_pixels(pre: Raster, stride: int | None) -> np.ndarray:
    data = pre.data
    if stride is not None:
        data = data[::stride, ::stride]
    return data.reshape(-1, pre.channels)


def reduce_colors(
    img: Raster,
    cfg: QuantizeConfig,
    edges=None,
    bank: KernelBank | None = None,
) -> Raster:
    """Variant dispatch: optional smoothing, palette fit, repaint."""
    if cfg.variant in ("adaptive_gk", "fast_adaptive_gk"):
        if edges is None or bank is None:
            raise ValueError(f"variant {cfg.variant!r} requires edges and bank")
        pre = adaptive_gaussian(img, edges, bank)
    elif cfg.variant in ("gk_means", "fast_gk_means"):
        pre = gaussian_blur(img, _SMOOTH_SIZE)
    else:
        pre = img

    stride = cfg.sample_stride if cfg.variant.startswith("fast_") else None
    sample = _fit_pixels(pre, stride)
    palette = kmeans_fit(sample, cfg.k, cfg.seed, cfg.max_iters, cfg.tol)
    return apply_palette(pre, palette)


def bit_depth_reduce(img: Raster, bits: int) -> Raster:
    """Quantize each channel to 2^bits levels (idempotent, monotone)."""
    if not (1 <= bits <= 8):
        raise ValueError(f"bits must be in 1..8, got {bits}")
    levels = (1 << bits) - 1
    v = np.arange(256, dtype=np.float64)
    q = np.floor(v * levels / 255.0 + 0.5)
    lut = to_u8(q * 255.0 / levels)
    return Raster(lut[img.data], img.colorspace)

"""Gaussian kernel bank and the edge-guided adaptive smoother.

The adaptive smoother blurs the whole image once per kernel size, then
picks, per pixel, the plane whose size matches the local soft-edge value:
strong soft edges keep the smallest kernel, flat regions get the largest.
Threshold spacing is a linear descent from ``255 / alpha``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import correlate2d_reflect101, median2d_reflect101
from .raster import Raster, to_u8

MIN_KERNEL = 3
MAX_KERNEL = 31
ALPHA_RANGE = (1, 6)
DEFAULT_SIZES = (3, 5, 7, 9)
DEFAULT_SOFT_SIZE = 7


@dataclass(frozen=True)
class GaussianKernel:
    size: int
    sigma: float
    weights: np.ndarray


@dataclass(frozen=True)
class KernelBank:
    """Strictly increasing odd kernel sizes with their selection thresholds."""

    sizes: tuple[int, ...]
    alpha: int
    thresholds: np.ndarray

    def __len__(self) -> int:
        return len(self.sizes)


def sigma_for_size(size: int) -> float:
    return 0.3 * ((size - 1) / 2 - 1) + 0.8


def make_kernel(size: int) -> GaussianKernel:
    """Normalized 2D Gaussian for an odd size in 3..31."""
    if size % 2 == 0 or not (MIN_KERNEL <= size <= MAX_KERNEL):
        raise ValueError(f"kernel size must be odd and in 3..31, got {size}")
    sigma = sigma_for_size(size)
    r = size // 2
    y, x = np.mgrid[-r : r + 1, -r : r + 1]
    weights = np.exp(-(x * x + y * y) / (2.0 * sigma * sigma))
    weights /= weights.sum()
    return GaussianKernel(size, sigma, weights)


def _per_channel(img: Raster, fn) -> Raster:
    planes = [fn(img.data[:, :, c]) for c in range(img.channels)]
    return Raster(np.stack(planes, axis=-1), img.colorspace)


def gaussian_blur(img: Raster, size: int) -> Raster:
    kernel = make_kernel(size)
    return _per_channel(
        img,
        lambda ch: to_u8(correlate2d_reflect101(ch.astype(np.float64), kernel.weights)),
    )


def median_blur(img: Raster, size: int) -> Raster:
    if size % 2 == 0 or size < 3:
        raise ValueError(f"median size must be odd and >= 3, got {size}")
    return _per_channel(img, lambda ch: median2d_reflect101(ch, size))


def selection_thresholds(alpha: int, n_kernels: int) -> np.ndarray:
    """Linear threshold descent from 255/alpha; one fewer entry than kernels."""
    if not (ALPHA_RANGE[0] <= alpha <= ALPHA_RANGE[1]):
        raise ValueError(f"alpha must be an integer in 1..6, got {alpha}")
    if n_kernels < 2:
        raise ValueError(f"need at least 2 kernels, got {n_kernels}")
    t_init = 255.0 / alpha
    steps = np.arange(1, n_kernels)
    return t_init * (n_kernels - steps) / (n_kernels - 1)


def make_bank(sizes: tuple[int, ...] = DEFAULT_SIZES, alpha: int = 2) -> KernelBank:
    sizes = tuple(int(s) for s in sizes)
    if len(sizes) < 2:
        raise ValueError("bank needs at least 2 kernel sizes")
    if any(s % 2 == 0 or not (MIN_KERNEL <= s <= MAX_KERNEL) for s in sizes):
        raise ValueError(f"kernel sizes must be odd and in 3..31, got {sizes}")
    if any(a >= b for a, b in zip(sizes, sizes[1:])):
        raise ValueError(f"kernel sizes must be strictly increasing, got {sizes}")
    if not isinstance(alpha, (int, np.integer)):
        raise ValueError(f"alpha must be an integer, got {alpha!r}")
    return KernelBank(sizes, int(alpha), selection_thresholds(alpha, len(sizes)))


def soft_edges(mask: Raster, size: int = DEFAULT_SOFT_SIZE) -> Raster:
    """Gaussian-blurred binary mask: graded proximity-to-edge values."""
    if not np.isin(mask.data, (0, 255)).all():
        raise ValueError("soft_edges expects a binary {0,255} mask")
    return gaussian_blur(mask, size)


def select_plane_index(soft: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    """0-based blurred-plane index per pixel; high soft value -> index 0."""
    counts = np.zeros(soft.shape, dtype=np.int64)
    for t in thresholds:
        counts += soft < t
    return counts


def adaptive_gaussian(img: Raster, edges, bank: KernelBank) -> Raster:
    """Per-pixel choice among the bank's blurred planes, guided by soft edges."""
    soft = edges.soft
    if soft.shape[:2] != (img.height, img.width):
        raise ValueError(
            f"edge map {soft.shape[:2]} does not match image "
            f"{(img.height, img.width)}"
        )
    planes = np.stack([gaussian_blur(img, s).data for s in bank.sizes])
    idx = select_plane_index(soft, bank.thresholds)
    out = np.take_along_axis(planes, idx[None, :, :, None], axis=0)[0]
    return Raster(out, img.colorspace)

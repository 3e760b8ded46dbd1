"""Auto-threshold Canny edge detection.

Instead of hand-tuned hysteresis thresholds, both thresholds come from a
false-alarm statistic over the gradient magnitude histogram: the expected
number of same-magnitude pixel pairs a white-noise image would produce at
or above a given magnitude. The low threshold is the smallest magnitude
whose false-alarm count drops to 1; the high threshold tightens that
acceptance level by the vision parameter ``lambda_v`` (count <= 1/lambda_v),
so larger ``lambda_v`` keeps only the strongest edges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import correlate2d_reflect101, hysteresis_fill, nms_suppress
from .raster import GRAY, Raster, round_half_up
from .smooth import DEFAULT_SOFT_SIZE, gaussian_blur, soft_edges

PRESMOOTH_SIZE = 5  # sigma 1.1 via the shared size->sigma rule
MAX_MAGNITUDE_BIN = 255
_SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
_SOBEL_Y = np.array([[-1, -2, -1], [0, 0, 0], [1, 2, 1]], dtype=np.float64)
_SOBEL_PEAK = 1020.0  # max |Sobel| response on 8-bit input


@dataclass(frozen=True)
class GradientStats:
    """Quantized gradient magnitudes with their histogram and tail counts."""

    histogram: np.ndarray
    n_h: int
    n_p: int
    tail_counts: np.ndarray
    tail: np.ndarray
    total: int
    magnitude: np.ndarray | None = None
    direction: np.ndarray | None = None

    @classmethod
    def from_histogram(cls, histogram, **extra) -> "GradientStats":
        hist = np.asarray(histogram, dtype=np.int64)
        if hist.ndim != 1 or hist.size < 1 or (hist < 0).any():
            raise ValueError("histogram must be a 1D array of counts")
        total = int(hist.sum())
        if total < 1:
            raise ValueError("histogram is empty")
        n_p = sum(int(c) * (int(c) - 1) // 2 for c in hist)
        tail_counts = hist[::-1].cumsum()[::-1].astype(np.int64)
        tail = tail_counts / total
        return cls(
            histogram=hist,
            n_h=hist.size - 1,
            n_p=n_p,
            tail_counts=tail_counts,
            tail=tail,
            total=total,
            **extra,
        )


@dataclass(frozen=True)
class NfaThresholds:
    lambda_v: float
    t_low: int
    t_high: int


@dataclass(frozen=True)
class EdgeMap:
    """Binary edge mask with its blurred (soft) counterpart."""

    mask: np.ndarray
    soft: np.ndarray

    def edge_fraction(self) -> float:
        return float(np.mean(self.mask == 255))


def _quantize_direction(gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    theta = np.mod(np.degrees(np.arctan2(gy, gx)), 180.0)
    return (np.floor((theta + 22.5) / 45.0).astype(np.int64) % 4).astype(np.uint8)


def gradient_stats(gray: Raster) -> GradientStats:
    """Sobel magnitudes of the pre-smoothed image, binned to 0..255."""
    if gray.colorspace != GRAY:
        raise ValueError("gradient_stats expects a 1-channel GRAY raster")
    if gray.height < 3 or gray.width < 3:
        raise ValueError("image must be at least 3x3 for gradients")
    smoothed = gaussian_blur(gray, PRESMOOTH_SIZE).plane(0).astype(np.float64)
    gx = correlate2d_reflect101(smoothed, _SOBEL_X)
    gy = correlate2d_reflect101(smoothed, _SOBEL_Y)
    mag = np.minimum(np.hypot(gx, gy), _SOBEL_PEAK)
    scaled = round_half_up(mag * (MAX_MAGNITUDE_BIN / _SOBEL_PEAK)).astype(np.uint8)
    hist = np.bincount(scaled.ravel(), minlength=MAX_MAGNITUDE_BIN + 1)
    return GradientStats.from_histogram(
        hist, magnitude=scaled, direction=_quantize_direction(gx, gy)
    )


def nfa(stats: GradientStats, u: int) -> float:
    """Expected count of same-bin pixel pairs at magnitude >= u under noise."""
    if not (0 <= u <= stats.n_h):
        raise ValueError(f"magnitude bin {u} out of range 0..{stats.n_h}")
    # exact integer product, one float division
    return (stats.n_p * int(stats.tail_counts[u])) / stats.total


def auto_thresholds(stats: GradientStats, lambda_v: float) -> NfaThresholds:
    """Lowest bins where the false-alarm count drops to 1 and to 1/lambda_v."""
    if lambda_v < 1:
        raise ValueError(f"lambda_v must be >= 1, got {lambda_v}")
    t_low = t_high = stats.n_h
    bound = 1.0 / lambda_v
    found_low = found_high = False
    for u in range(stats.n_h + 1):
        value = nfa(stats, u)
        if not found_low and value <= 1.0:
            t_low, found_low = u, True
        if value <= bound:
            t_high, found_high = u, True
            break
    if not found_high:
        t_high = stats.n_h
    return NfaThresholds(float(lambda_v), t_low, t_high)


def canny_auto(
    gray: Raster, lambda_v: float, soft_size: int = DEFAULT_SOFT_SIZE
) -> EdgeMap:
    """Full Canny pipeline with self-derived thresholds."""
    stats = gradient_stats(gray)
    th = auto_thresholds(stats, lambda_v)
    keep = nms_suppress(stats.magnitude, stats.direction).astype(bool)
    mag = stats.magnitude.astype(np.int32)
    strong = keep & (mag > th.t_high)
    weak = keep & (mag > th.t_low) & (mag <= th.t_high)
    filled = hysteresis_fill(
        strong.astype(np.uint8), weak.astype(np.uint8)
    )
    mask = (filled * 255).astype(np.uint8)
    soft = soft_edges(Raster(mask[:, :, None], GRAY), soft_size).plane(0)
    return EdgeMap(mask=mask, soft=soft)

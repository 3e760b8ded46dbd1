"""Adversarial perturbation suppression for 8-bit images.

Pipeline stages: auto-threshold Canny edge detection, edge-guided
adaptive Gaussian smoothing, and k-means color reduction, plus the
fixed baselines (bit-depth cut, JPEG-style round-trip, median and
Gaussian smoothing) they are compared against.
"""

from ._backend import active_backend, set_backend
from .codec import QuantTables, jpeg_roundtrip, scale_tables
from .edge import (
    EdgeMap,
    GradientStats,
    NfaThresholds,
    auto_thresholds,
    canny_auto,
    gradient_stats,
    nfa,
)
from .quantize import (
    Palette,
    QuantizeConfig,
    apply_palette,
    bit_depth_reduce,
    kmeans_fit,
    reduce_colors,
)
from .raster import Raster, load, rgb_ycbcr, save, to_gray
from .smooth import (
    GaussianKernel,
    KernelBank,
    adaptive_gaussian,
    gaussian_blur,
    make_bank,
    make_kernel,
    median_blur,
    selection_thresholds,
    soft_edges,
)

__version__ = "0.1.0"

__all__ = [
    "EdgeMap",
    "GaussianKernel",
    "GradientStats",
    "KernelBank",
    "NfaThresholds",
    "Palette",
    "QuantTables",
    "QuantizeConfig",
    "Raster",
    "active_backend",
    "adaptive_gaussian",
    "apply_palette",
    "auto_thresholds",
    "bit_depth_reduce",
    "canny_auto",
    "gaussian_blur",
    "gradient_stats",
    "jpeg_roundtrip",
    "kmeans_fit",
    "load",
    "make_bank",
    "make_kernel",
    "median_blur",
    "nfa",
    "reduce_colors",
    "rgb_ycbcr",
    "save",
    "scale_tables",
    "selection_thresholds",
    "set_backend",
    "soft_edges",
    "to_gray",
]

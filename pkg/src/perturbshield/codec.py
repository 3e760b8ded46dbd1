"""JPEG-style lossy round-trip: block DCT + quality-scaled quantization.

Models only the lossy part of baseline JPEG (color transform, 8x8 DCT,
table quantization) and skips entropy coding, which never changes pixels.
Chroma is kept at full resolution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import GRAY, RGB, Raster, rgb_ycbcr, round_half_up

# Baseline luminance/chrominance quantization tables (quality 50 reference).
BASE_LUMA = np.array(
    [
        [16, 11, 10, 16, 24, 40, 51, 61],
        [12, 12, 14, 19, 26, 58, 60, 55],
        [14, 13, 16, 24, 40, 57, 69, 56],
        [14, 17, 22, 29, 51, 87, 80, 62],
        [18, 22, 37, 56, 68, 109, 103, 77],
        [24, 35, 55, 64, 81, 104, 113, 92],
        [49, 64, 78, 87, 103, 121, 120, 101],
        [72, 92, 95, 98, 112, 100, 103, 99],
    ],
    dtype=np.int64,
)
BASE_CHROMA = np.array(
    [
        [17, 18, 24, 47, 99, 99, 99, 99],
        [18, 21, 26, 66, 99, 99, 99, 99],
        [24, 26, 56, 99, 99, 99, 99, 99],
        [47, 66, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
    ],
    dtype=np.int64,
)


def _dct_matrix() -> np.ndarray:
    k = np.arange(8)[:, None]
    n = np.arange(8)[None, :]
    c = np.cos(np.pi * (2 * n + 1) * k / 16.0)
    c *= np.sqrt(2.0 / 8.0)
    c[0] /= np.sqrt(2.0)
    return c


_DCT = _dct_matrix()


@dataclass(frozen=True)
class QuantTables:
    luma: np.ndarray
    chroma: np.ndarray
    quality: int


def scale_tables(quality: int) -> QuantTables:
    """libjpeg-convention quality scaling of the base tables."""
    if not (1 <= quality <= 100):
        raise ValueError(f"quality must be in 1..100, got {quality}")
    scale = 5000 // quality if quality < 50 else 200 - 2 * quality
    def apply(base: np.ndarray) -> np.ndarray:
        return np.clip((base * scale + 50) // 100, 1, 255)
    return QuantTables(apply(BASE_LUMA), apply(BASE_CHROMA), quality)


def dct2(block: np.ndarray) -> np.ndarray:
    """Orthonormal 2D DCT-II of an 8x8 block (batched over leading axes)."""
    return _DCT @ block @ _DCT.T


def idct2(coeffs: np.ndarray) -> np.ndarray:
    return _DCT.T @ coeffs @ _DCT


def _round_half_away(values: np.ndarray) -> np.ndarray:
    return np.sign(values) * np.floor(np.abs(values) + 0.5)


def _blocks(channel: np.ndarray) -> tuple[np.ndarray, tuple[int, int]]:
    h, w = channel.shape
    ph = (-h) % 8
    pw = (-w) % 8
    padded = np.pad(channel, ((0, ph), (0, pw)), mode="edge")
    bh, bw = padded.shape[0] // 8, padded.shape[1] // 8
    blocks = padded.reshape(bh, 8, bw, 8).transpose(0, 2, 1, 3).reshape(-1, 8, 8)
    return blocks, (bh, bw)


def _unblocks(blocks: np.ndarray, grid: tuple[int, int], h: int, w: int) -> np.ndarray:
    bh, bw = grid
    padded = blocks.reshape(bh, bw, 8, 8).transpose(0, 2, 1, 3).reshape(bh * 8, bw * 8)
    return padded[:h, :w]


def _roundtrip_channel(channel: np.ndarray, table: np.ndarray) -> np.ndarray:
    h, w = channel.shape
    blocks, grid = _blocks(channel.astype(np.float64))
    coeffs = dct2(blocks - 128.0)
    quantized = _round_half_away(coeffs / table) * table
    recon = idct2(quantized) + 128.0
    recon = round_half_up(np.clip(recon, 0.0, 255.0))
    return _unblocks(recon, grid, h, w).astype(np.uint8)


def jpeg_roundtrip(img: Raster, quality: int) -> Raster:
    """Encode-decode pixel effect at the given quality, no bitstream."""
    tables = scale_tables(quality)
    if img.channels == 1:
        out = _roundtrip_channel(img.plane(0), tables.luma)
        return Raster(out[:, :, None], GRAY)
    if img.colorspace != RGB:
        raise ValueError("jpeg_roundtrip expects an RGB or GRAY raster")
    ycc = rgb_ycbcr(img, "forward")
    planes = [
        _roundtrip_channel(ycc.plane(0), tables.luma),
        _roundtrip_channel(ycc.plane(1), tables.chroma),
        _roundtrip_channel(ycc.plane(2), tables.chroma),
    ]
    out = Raster(np.stack(planes, axis=-1), "YCbCr")
    return rgb_ycbcr(out, "inverse")

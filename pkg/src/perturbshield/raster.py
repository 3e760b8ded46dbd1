"""8-bit raster images: the carrier type plus file I/O and color transforms.

Supported on disk: PNG (via Pillow, 8-bit only), binary PPM (P6) and
PGM (P5) with maxval 255. All stages exchange ``Raster`` values; pixel
data is a row-major ``(height, width, channels)`` uint8 array.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

RGB = "RGB"
GRAY = "GRAY"
YCBCR = "YCbCr"

_COLORSPACES = (RGB, GRAY, YCBCR)
_MAX_SIDE = 2 ** 16


def round_half_up(values: np.ndarray) -> np.ndarray:
    """Round half away from zero for non-negative floats (8-bit boundary rule)."""
    return np.floor(values + 0.5)


def to_u8(values: np.ndarray) -> np.ndarray:
    return np.clip(round_half_up(values), 0, 255).astype(np.uint8)


@dataclass(frozen=True)
class Raster:
    """Immutable 8-bit image with a colorspace tag."""

    data: np.ndarray
    colorspace: str = RGB

    def __post_init__(self) -> None:
        arr = np.asarray(self.data)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.dtype != np.uint8:
            raise ValueError("raster data must be a (H, W, C) uint8 array")
        h, w, c = arr.shape
        if h < 1 or w < 1:
            raise ValueError("raster sides must be >= 1")
        if c not in (1, 3):
            raise ValueError(f"raster must have 1 or 3 channels, got {c}")
        if self.colorspace not in _COLORSPACES:
            raise ValueError(f"unknown colorspace {self.colorspace!r}")
        if (self.colorspace == GRAY) != (c == 1):
            raise ValueError("colorspace GRAY requires exactly 1 channel")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def plane(self, index: int = 0) -> np.ndarray:
        return self.data[:, :, index]

    def same_pixels(self, other: "Raster") -> bool:
        return (
            self.data.shape == other.data.shape
            and bool(np.array_equal(self.data, other.data))
        )


def _check_side(value: int) -> int:
    if value < 1 or value > _MAX_SIDE:
        raise ValueError(f"image side {value} out of range 1..{_MAX_SIDE}")
    return value


def _read_pnm_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    # whitespace- and comment-tolerant header scanner
    n = len(buf)
    while pos < n:
        ch = buf[pos : pos + 1]
        if ch == b"#":
            while pos < n and buf[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif ch.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos : pos + 1].isspace() and buf[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise ValueError("truncated PNM header")
    return buf[start:pos], pos


def _load_pnm(path: Path) -> Raster:
    blob = path.read_bytes()
    magic, pos = _read_pnm_token(blob, 0)
    if magic not in (b"P5", b"P6"):
        raise ValueError(f"unsupported PNM magic {magic!r}")
    fields = []
    for _ in range(3):
        tok, pos = _read_pnm_token(blob, pos)
        fields.append(int(tok))
    width, height, maxval = fields
    _check_side(width)
    _check_side(height)
    if maxval != 255:
        raise ValueError(f"unsupported bit depth (maxval {maxval}, want 255)")
    pos += 1  # single whitespace after maxval
    channels = 3 if magic == b"P6" else 1
    count = width * height * channels
    pixels = np.frombuffer(blob, dtype=np.uint8, count=count, offset=pos)
    if pixels.size != count:
        raise ValueError("truncated PNM pixel data")
    data = pixels.reshape(height, width, channels)
    return Raster(data, RGB if channels == 3 else GRAY)


def _load_png(path: Path) -> Raster:
    with Image.open(path) as im:
        if im.format != "PNG":
            raise ValueError(f"unsupported format {im.format!r}")
        mode = im.mode
        if mode in ("I", "I;16", "I;16B", "I;16L", "I;16N"):
            raise ValueError("unsupported bit depth (16-bit PNG)")
        if mode in ("RGBA", "LA", "PA"):
            raise ValueError("alpha channels are not supported")
        if mode == "P":
            im = im.convert("RGB")
        elif mode not in ("L", "RGB"):
            raise ValueError(f"unsupported PNG mode {mode!r}")
        w, h = im.size
        _check_side(w)
        _check_side(h)
        arr = np.asarray(im, dtype=np.uint8)
    if arr.ndim == 2:
        return Raster(arr[:, :, None], GRAY)
    return Raster(arr, RGB)


def load(path: str | Path) -> Raster:
    """Load a PNG, PPM (P6) or PGM (P5) file."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"cannot read {path}")
    suffix = path.suffix.lower()
    if suffix in (".ppm", ".pgm", ".pnm"):
        return _load_pnm(path)
    if suffix == ".png":
        return _load_png(path)
    raise ValueError(f"unsupported format {suffix!r} (want .png/.ppm/.pgm)")


def save(img: Raster, path: str | Path) -> None:
    """Write a raster; the extension must match the channel count."""
    path = Path(path)
    if img.colorspace not in (RGB, GRAY):
        raise ValueError(f"cannot save colorspace {img.colorspace!r}")
    suffix = path.suffix.lower()
    if suffix == ".ppm":
        if img.channels != 3:
            raise ValueError("PPM requires a 3-channel raster")
        header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
        path.write_bytes(header + img.data.tobytes())
    elif suffix == ".pgm":
        if img.channels != 1:
            raise ValueError("PGM requires a 1-channel raster")
        header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
        path.write_bytes(header + img.data.tobytes())
    elif suffix == ".png":
        arr = img.data[:, :, 0] if img.channels == 1 else img.data
        Image.fromarray(arr, mode="L" if img.channels == 1 else "RGB").save(
            path, format="PNG"
        )
    else:
        raise ValueError(f"unsupported format {suffix!r} (want .png/.ppm/.pgm)")


_BT601 = np.array([0.299, 0.587, 0.114])


def to_gray(img: Raster) -> Raster:
    """BT.601 luma; GRAY inputs pass through unchanged."""
    if img.colorspace == GRAY:
        return img
    if img.colorspace != RGB:
        raise ValueError("to_gray expects RGB or GRAY input")
    luma = img.data.astype(np.float64) @ _BT601
    return Raster(to_u8(luma)[:, :, None], GRAY)


def rgb_ycbcr(img: Raster, direction: str) -> Raster:
    """Full-range JFIF BT.601 color transform, rounded and clamped to 8 bits."""
    if img.channels != 3:
        raise ValueError("rgb_ycbcr requires a 3-channel raster")
    f = img.data.astype(np.float64)
    if direction == "forward":
        if img.colorspace != RGB:
            raise ValueError("forward transform expects an RGB raster")
        r, g, b = f[:, :, 0], f[:, :, 1], f[:, :, 2]
        y = 0.299 * r + 0.587 * g + 0.114 * b
        cb = -0.168736 * r - 0.331264 * g + 0.5 * b + 128.0
        cr = 0.5 * r - 0.418688 * g - 0.081312 * b + 128.0
        return Raster(to_u8(np.stack([y, cb, cr], axis=-1)), YCBCR)
    if direction == "inverse":
        if img.colorspace != YCBCR:
            raise ValueError("inverse transform expects a YCbCr raster")
        y, cb, cr = f[:, :, 0], f[:, :, 1] - 128.0, f[:, :, 2] - 128.0
        r = y + 1.402 * cr
        g = y - 0.344136 * cb - 0.714136 * cr
        b = y + 1.772 * cb
        return Raster(to_u8(np.stack([r, g, b], axis=-1)), RGB)
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")

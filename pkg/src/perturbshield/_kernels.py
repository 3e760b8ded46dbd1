"""Hot per-pixel loops: numba-jitted kernels with pure-numpy fallbacks.

Every public function here dispatches on the active backend and the two
paths are bit-identical by construction: float accumulations run in the
same tap order, integer logic is exact, and argmin ties resolve to the
lowest index on both sides. ``tests/test_backends.py`` pins that equality.
"""

from __future__ import annotations

import numpy as np

from ._backend import use_numba

# Neighbor offsets along the quantized gradient direction, one (first, second)
# pair per direction code 0..3. Ties break toward "first" (strictly greater
# required) so a symmetric ridge keeps exactly one pixel.
_NMS_OFFSETS = (
    ((0, -1), (0, 1)),    # 0: horizontal gradient
    ((-1, -1), (1, 1)),   # 1: 45 degrees
    ((-1, 0), (1, 0)),    # 2: vertical gradient
    ((-1, 1), (1, -1)),   # 3: 135 degrees
)


# ---------------------------------------------------------------------------
# pure-numpy fallbacks
# ---------------------------------------------------------------------------

def _pad_reflect101(img: np.ndarray, ry: int, rx: int) -> np.ndarray:
    # np.pad 'reflect' never duplicates the edge sample, matching the
    # mirror-index rule used by the numba path.
    return np.pad(img, ((ry, ry), (rx, rx)), mode="reflect")


def _correlate2d_np(img: np.ndarray, weights: np.ndarray) -> np.ndarray:
    kh, kw = weights.shape
    ry, rx = kh // 2, kw // 2
    padded = _pad_reflect101(img, ry, rx)
    h, w = img.shape
    acc = np.zeros((h, w), dtype=np.float64)
    # Tap order (ky, kx) must match the numba loop for bit-equal sums.
    for ky in range(kh):
        for kx in range(kw):
            acc += weights[ky, kx] * padded[ky : ky + h, kx : kx + w]
    return acc


def _median2d_np(img: np.ndarray, size: int) -> np.ndarray:
    r = size // 2
    padded = _pad_reflect101(img, r, r)
    h, w = img.shape
    stack = np.empty((size * size, h, w), dtype=img.dtype)
    i = 0
    for ky in range(size):
        for kx in range(size):
            stack[i] = padded[ky : ky + h, kx : kx + w]
            i += 1
    # odd sample count: the median is always an element of the window
    return np.median(stack, axis=0).astype(img.dtype)


def _nms_np(mag: np.ndarray, direction: np.ndarray) -> np.ndarray:
    h, w = mag.shape
    keep = np.zeros((h, w), dtype=np.uint8)
    if h < 3 or w < 3:
        return keep
    m = mag.astype(np.int32)
    core = m[1:-1, 1:-1]
    for code, ((fy, fx), (sy, sx)) in enumerate(_NMS_OFFSETS):
        first = m[1 + fy : h - 1 + fy, 1 + fx : w - 1 + fx]
        second = m[1 + sy : h - 1 + sy, 1 + sx : w - 1 + sx]
        sel = (direction[1:-1, 1:-1] == code) & (core > first) & (core >= second)
        keep[1:-1, 1:-1] |= sel.astype(np.uint8)
    return keep


def _hysteresis_np(strong: np.ndarray, weak: np.ndarray) -> np.ndarray:
    candidates = (strong | weak).astype(bool)
    cur = strong.astype(bool)
    while True:
        # 8-connected dilation by one step, clipped to candidates
        d = cur
        g = np.zeros_like(cur)
        g[1:, :] |= d[:-1, :]
        g[:-1, :] |= d[1:, :]
        g[:, 1:] |= d[:, :-1]
        g[:, :-1] |= d[:, 1:]
        g[1:, 1:] |= d[:-1, :-1]
        g[1:, :-1] |= d[:-1, 1:]
        g[:-1, 1:] |= d[1:, :-1]
        g[:-1, :-1] |= d[1:, 1:]
        nxt = cur | (g & candidates)
        if np.array_equal(nxt, cur):
            return cur.astype(np.uint8)
        cur = nxt


def _assign_labels_np(
    points: np.ndarray, centroids: np.ndarray, chunk: int = 4096
) -> tuple[np.ndarray, np.ndarray]:
    n = points.shape[0]
    labels = np.empty(n, dtype=np.int64)
    dists = np.empty(n, dtype=np.float64)
    nch = points.shape[1]
    for start in range(0, n, chunk):
        block = points[start : start + chunk]
        diff = block[:, None, :] - centroids[None, :, :]
        # accumulate channels sequentially: same float op order as numba
        d2 = np.zeros(diff.shape[:2], dtype=np.float64)
        for ch in range(nch):
            d2 += diff[:, :, ch] * diff[:, :, ch]
        lab = np.argmin(d2, axis=1)
        labels[start : start + chunk] = lab
        dists[start : start + chunk] = d2[np.arange(block.shape[0]), lab]
    return labels, dists


# ---------------------------------------------------------------------------
# numba kernels
# ---------------------------------------------------------------------------

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore[misc]
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


@njit(cache=True)
def _mirror(idx: int, n: int) -> int:
    # reflect-101 with arbitrary overshoot (period 2(n-1))
    if n == 1:
        return 0
    period = 2 * (n - 1)
    p = idx % period
    if p < 0:
        p += period
    if p >= n:
        p = period - p
    return p


@njit(cache=True)
def _correlate2d_nb(img, weights):
    h, w = img.shape
    kh, kw = weights.shape
    ry, rx = kh // 2, kw // 2
    out = np.zeros((h, w), dtype=np.float64)
    for ky in range(kh):
        for kx in range(kw):
            wt = weights[ky, kx]
            for y in range(h):
                sy = _mirror(y + ky - ry, h)
                for x in range(w):
                    sx = _mirror(x + kx - rx, w)
                    out[y, x] += wt * img[sy, sx]
    return out


@njit(cache=True)
def _median2d_nb(img, size):
    h, w = img.shape
    r = size // 2
    out = np.empty((h, w), dtype=img.dtype)
    buf = np.empty(size * size, dtype=img.dtype)
    mid = (size * size) // 2
    for y in range(h):
        for x in range(w):
            i = 0
            for ky in range(-r, r + 1):
                sy = _mirror(y + ky, h)
                for kx in range(-r, r + 1):
                    buf[i] = img[sy, _mirror(x + kx, w)]
                    i += 1
            out[y, x] = np.sort(buf)[mid]
    return out


@njit(cache=True)
def _nms_nb(mag, direction):
    h, w = mag.shape
    keep = np.zeros((h, w), dtype=np.uint8)
    for y in range(1, h - 1):
        for x in range(1, w - 1):
            m = np.int32(mag[y, x])
            if m == 0:
                continue
            d = direction[y, x]
            if d == 0:
                a = np.int32(mag[y, x - 1])
                b = np.int32(mag[y, x + 1])
            elif d == 1:
                a = np.int32(mag[y - 1, x - 1])
                b = np.int32(mag[y + 1, x + 1])
            elif d == 2:
                a = np.int32(mag[y - 1, x])
                b = np.int32(mag[y + 1, x])
            else:
                a = np.int32(mag[y - 1, x + 1])
                b = np.int32(mag[y + 1, x - 1])
            if m > a and m >= b:
                keep[y, x] = 1
    return keep


@njit(cache=True)
def _hysteresis_nb(strong, weak):
    h, w = strong.shape
    out = np.zeros((h, w), dtype=np.uint8)
    stack = np.empty((h * w, 2), dtype=np.int64)
    top = 0
    for y in range(h):
        for x in range(w):
            if strong[y, x]:
                out[y, x] = 1
                stack[top, 0] = y
                stack[top, 1] = x
                top += 1
    while top > 0:
        top -= 1
        y = stack[top, 0]
        x = stack[top, 1]
        for dy in range(-1, 2):
            ny = y + dy
            if ny < 0 or ny >= h:
                continue
            for dx in range(-1, 2):
                nx = x + dx
                if nx < 0 or nx >= w:
                    continue
                if out[ny, nx] == 0 and (weak[ny, nx] or strong[ny, nx]):
                    out[ny, nx] = 1
                    stack[top, 0] = ny
                    stack[top, 1] = nx
                    top += 1
    return out


@njit(cache=True)
def _assign_labels_nb(points, centroids):
    n, c = points.shape
    k = centroids.shape[0]
    labels = np.empty(n, dtype=np.int64)
    dists = np.empty(n, dtype=np.float64)
    for i in range(n):
        best = 0
        best_d = np.inf
        for j in range(k):
            d = 0.0
            for ch in range(c):
                diff = points[i, ch] - centroids[j, ch]
                d += diff * diff
            if d < best_d:
                best_d = d
                best = j
        labels[i] = best
        dists[i] = best_d
    return labels, dists


# ---------------------------------------------------------------------------
# dispatchers
# ---------------------------------------------------------------------------

def correlate2d_reflect101(img: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """2D correlation of a float64 image with reflect-101 borders."""
    img = np.ascontiguousarray(img, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    if use_numba():
        return _correlate2d_nb(img, weights)
    return _correlate2d_np(img, weights)


def median2d_reflect101(img: np.ndarray, size: int) -> np.ndarray:
    """Median filter of a single uint8 channel, reflect-101 borders."""
    img = np.ascontiguousarray(img)
    if use_numba():
        return _median2d_nb(img, size)
    return _median2d_np(img, size)


def nms_suppress(mag: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """Directional non-maximum suppression; 1 where the pixel survives.

    The one-pixel border frame never survives.
    """
    mag = np.ascontiguousarray(mag)
    direction = np.ascontiguousarray(direction)
    if use_numba():
        return _nms_nb(mag, direction)
    return _nms_np(mag, direction)


def hysteresis_fill(strong: np.ndarray, weak: np.ndarray) -> np.ndarray:
    """8-connected transitive closure of weak pixels reachable from strong."""
    strong = np.ascontiguousarray(strong, dtype=np.uint8)
    weak = np.ascontiguousarray(weak, dtype=np.uint8)
    if use_numba():
        return _hysteresis_nb(strong, weak)
    return _hysteresis_np(strong, weak)


def assign_labels(
    points: np.ndarray, centroids: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-centroid assignment (squared Euclidean, ties to lowest index)."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    centroids = np.ascontiguousarray(centroids, dtype=np.float64)
    if use_numba():
        return _assign_labels_nb(points, centroids)
    return _assign_labels_np(points, centroids)

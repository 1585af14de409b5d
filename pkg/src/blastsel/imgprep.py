"""Cell-image preprocessing: Otsu foreground isolation, bounding-box crop, resize.

Images are numpy arrays: RGB is (height, width, 3) uint8, grayscale is
(height, width) uint8 and masks are (height, width) bool. The pipeline is
grayscale -> inverse Otsu threshold (dark cells are foreground) -> composite
onto a white background -> tight crop -> 224x224 bilinear resize.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import EmptyForegroundError

OUTPUT_SIZE = 224

# BT.601 luma weights
_LUMA = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class BoundingBox:
    """Inclusive pixel box."""

    x_min: int
    y_min: int
    x_max: int
    y_max: int

    def __post_init__(self):
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError(f"degenerate bounding box {self}")
        if min(self.x_min, self.y_min) < 0:
            raise ValueError(f"negative bounding box coordinate {self}")


def _check_rgb(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8 or img.size == 0:
        raise ValueError("expected a non-empty (h, w, 3) uint8 image")
    return img


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """BT.601 luma: round(0.299 R + 0.587 G + 0.114 B), clamped to [0, 255]."""
    img = _check_rgb(img)
    luma = img.astype(np.float64) @ _LUMA
    return np.clip(np.floor(luma + 0.5), 0, 255).astype(np.uint8)


def otsu_threshold(img: np.ndarray) -> int:
    """Smallest threshold maximizing between-class variance of the 256-bin histogram.

    Class 0 holds pixels <= t. The variance ordering is evaluated in exact
    integer arithmetic, so ties always resolve to the smallest threshold.
    """
    img = np.asarray(img)
    if img.size == 0:
        raise ValueError("empty image")
    if img.dtype != np.uint8:
        raise ValueError("expected uint8 intensities")
    hist = np.bincount(img.ravel().astype(np.int64), minlength=256)
    n = int(hist.sum())
    s = int((hist * np.arange(256)).sum())
    # sigma_b^2(t) is proportional to (s0*n1 - s1*n0)^2 / (n0*n1); compare as
    # exact fractions to pick the smallest argmax.
    best_t, best_num, best_den = 0, 0, 1
    n0 = 0
    s0 = 0
    for t in range(256):
        n0 += int(hist[t])
        s0 += int(hist[t]) * t
        n1 = n - n0
        if n0 == 0 or n1 == 0:
            num, den = 0, 1
        else:
            num = (s0 * n1 - (s - s0) * n0) ** 2
            den = n0 * n1
        if num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    return best_t


def segment_foreground(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Inverse-threshold the image; background pixels become white.

    Returns (masked image, foreground mask). Foreground is every pixel whose
    grayscale value is <= the Otsu threshold.
    """
    img = _check_rgb(img)
    gray = to_grayscale(img)
    t = otsu_threshold(gray)
    mask = gray <= t
    masked = img.copy()
    masked[~mask] = 255
    return masked, mask


def foreground_bbox(mask: np.ndarray) -> BoundingBox:
    """Tight inclusive box over the true mask bits."""
    mask = np.asarray(mask, dtype=bool)
    ys, xs = np.nonzero(mask)
    if len(ys) == 0:
        raise EmptyForegroundError("mask has no foreground pixels")
    return BoundingBox(int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max()))


def resize_bilinear(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resample with half-pixel centers and edge clamping.

    Source coordinate for output index i is (i + 0.5) * src/dst - 0.5. Works on
    (h, w) or (h, w, c) uint8 arrays; output values round half-up.
    """
    img = np.asarray(img)
    if out_h < 1 or out_w < 1:
        raise ValueError("output size must be positive")
    src_h, src_w = img.shape[:2]

    def _axis(out_n: int, src_n: int):
        coords = (np.arange(out_n) + 0.5) * (src_n / out_n) - 0.5
        coords = np.clip(coords, 0.0, src_n - 1.0)
        lo = np.floor(coords).astype(np.int64)
        hi = np.minimum(lo + 1, src_n - 1)
        frac = coords - lo
        return lo, hi, frac

    y0, y1, fy = _axis(out_h, src_h)
    x0, x1, fx = _axis(out_w, src_w)

    data = img.astype(np.float64)
    p00 = data[np.ix_(y0, x0)]
    p01 = data[np.ix_(y0, x1)]
    p10 = data[np.ix_(y1, x0)]
    p11 = data[np.ix_(y1, x1)]
    if data.ndim == 3:
        fx = fx[None, :, None]
        fy = fy[:, None, None]
    else:
        fx = fx[None, :]
        fy = fy[:, None]
    top = p00 * (1.0 - fx) + p01 * fx
    bot = p10 * (1.0 - fx) + p11 * fx
    out = top * (1.0 - fy) + bot * fy
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)


def crop_resize(img: np.ndarray, box: BoundingBox, size: int = OUTPUT_SIZE) -> np.ndarray:
    """Crop to the inclusive box, then resize to size x size."""
    img = _check_rgb(img)
    h, w = img.shape[:2]
    if box.x_max >= w or box.y_max >= h:
        raise ValueError(f"bounding box {box} exceeds image {w}x{h}")
    crop = img[box.y_min : box.y_max + 1, box.x_min : box.x_max + 1]
    return resize_bilinear(crop, size, size)


def preprocess_image(img: np.ndarray) -> np.ndarray:
    """Full preprocessing chain: segment, crop to foreground, resize to 224x224."""
    masked, mask = segment_foreground(img)
    box = foreground_bbox(mask)
    return crop_resize(masked, box)


def load_image(path) -> np.ndarray:
    """Read a PNG or BMP file as an (h, w, 3) uint8 array."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def save_image(img: np.ndarray, path) -> None:
    Image.fromarray(_check_rgb(img), mode="RGB").save(path, format="PNG")


def preprocess_dir(in_dir, out_dir, skip_empty: bool = False) -> tuple[int, list[str]]:
    """Preprocess every .png/.bmp in in_dir into <stem>.png files under out_dir.

    Returns (number written, skipped stems). Without skip_empty the first
    image with no detectable foreground raises EmptyForegroundError.
    """
    names = sorted(
        f for f in os.listdir(in_dir) if f.lower().endswith((".png", ".bmp"))
    )
    os.makedirs(out_dir, exist_ok=True)
    written = 0
    skipped: list[str] = []
    for name in names:
        stem = os.path.splitext(name)[0]
        img = load_image(os.path.join(in_dir, name))
        try:
            out = preprocess_image(img)
        except EmptyForegroundError:
            if not skip_empty:
                raise EmptyForegroundError(f"{name}: no foreground pixels")
            skipped.append(stem)
            continue
        save_image(out, os.path.join(out_dir, f"{stem}.png"))
        written += 1
    return written, skipped

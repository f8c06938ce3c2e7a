"""Core raster operations: PNG I/O, luminance, gradients, HSV augmentation.

Images are ``(H, W, 3)`` uint8 arrays in RGB order; planes are ``(H, W)``
float64 arrays. All functions are pure.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, DimensionMismatchError, EmptyMaskError

# Rec.601 luma weights on the 0..255 scale.
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])

# Chroma scale factors of the matching Y'CbCr decomposition.
_CB_SCALE = 0.564  # 0.5 / (1 - 0.114)
_CR_SCALE = 0.713  # 0.5 / (1 - 0.299)


@dataclass(frozen=True)
class AugmentationConfig:
    """One whole-image HSV perturbation, fully determined by (strength, seed).

    ``strength`` in [0, 1] bounds the hue offset (fraction of a half-turn)
    and the multiplicative S/V factor range [1-strength, 1+strength].
    """

    strength: float
    seed: int

    def __post_init__(self):
        if not 0.0 <= self.strength <= 1.0:
            raise ValueError(f"strength must be in [0, 1], got {self.strength}")


def ensure_raster(img: np.ndarray) -> np.ndarray:
    """Validate and return an (H, W, 3) uint8 image array."""
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) image, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("image must be at least 1x1")
    if arr.dtype != np.uint8:
        raise ValueError(f"expected uint8 image, got {arr.dtype}")
    return arr


def round_half_up(x: np.ndarray) -> np.ndarray:
    """Round to nearest integer, halves away from zero toward +inf."""
    return np.floor(np.asarray(x, dtype=np.float64) + 0.5)


def load_image(path) -> np.ndarray:
    """Decode a PNG file to an (H, W, 3) uint8 RGB array.

    Alpha is composited over opaque white. Non-PNG files are rejected.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    return decode_png(data)


def decode_png(data: bytes) -> np.ndarray:
    """Decode PNG bytes; alpha composited over white."""
    try:
        with Image.open(io.BytesIO(data)) as im:
            if im.format != "PNG":
                raise DecodeError(f"expected PNG, got {im.format}")
            im.load()
            if im.mode in ("RGBA", "LA", "PA"):
                rgba = np.asarray(im.convert("RGBA"), dtype=np.float64)
                alpha = rgba[:, :, 3:4] / 255.0
                rgb = rgba[:, :, :3] * alpha + 255.0 * (1.0 - alpha)
                return round_half_up(rgb).clip(0, 255).astype(np.uint8)
            return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()
    except UnidentifiedImageError as exc:
        raise DecodeError("malformed PNG") from exc


def save_image(path, img: np.ndarray) -> None:
    """Write an image as 8-bit RGB PNG (lossless, bit-exact round-trip)."""
    Image.fromarray(ensure_raster(img), mode="RGB").save(path, format="PNG")


def encode_png(img: np.ndarray) -> bytes:
    """Encode an image to PNG bytes."""
    buf = io.BytesIO()
    Image.fromarray(ensure_raster(img), mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def luminance(img: np.ndarray) -> np.ndarray:
    """Rec.601 luma plane, real-valued in [0, 255]."""
    return ensure_raster(img).astype(np.float64) @ LUMA_WEIGHTS


def gradients(lum: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Forward-difference gradients of a plane.

    gx(i, j) = L(i, j+1) - L(i, j); gy(i, j) = L(i+1, j) - L(i, j).
    Replicate border: the last column of gx and last row of gy are 0.
    """
    lum = np.asarray(lum, dtype=np.float64)
    gx = np.zeros_like(lum)
    gy = np.zeros_like(lum)
    gx[:, :-1] = lum[:, 1:] - lum[:, :-1]
    gy[:-1, :] = lum[1:, :] - lum[:-1, :]
    return gx, gy


def threshold_gradients(
    gx: np.ndarray, gy: np.ndarray, tau: float = 8.0
) -> tuple[np.ndarray, np.ndarray]:
    """Binarize gradient planes: 1.0 where |g| > tau (strict), else 0.0."""
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    bx = (np.abs(np.asarray(gx, dtype=np.float64)) > tau).astype(np.float64)
    by = (np.abs(np.asarray(gy, dtype=np.float64)) > tau).astype(np.float64)
    return bx, by


def rgb_to_hsv(rgb01: np.ndarray) -> np.ndarray:
    """Vectorized RGB -> HSV, all channels in [0, 1] (H as fraction of 360)."""
    rgb01 = np.asarray(rgb01, dtype=np.float64)
    r, g, b = rgb01[..., 0], rgb01[..., 1], rgb01[..., 2]
    maxc = rgb01.max(axis=-1)
    minc = rgb01.min(axis=-1)
    delta = maxc - minc
    v = maxc
    s = np.where(maxc > 0, delta / np.where(maxc > 0, maxc, 1.0), 0.0)

    h = np.zeros_like(maxc)
    nz = delta > 0
    d = np.where(nz, delta, 1.0)
    rc = (maxc - r) / d
    gc = (maxc - g) / d
    bc = (maxc - b) / d
    h = np.where(nz & (maxc == r), bc - gc, h)
    h = np.where(nz & (maxc == g) & (maxc != r), 2.0 + rc - bc, h)
    h = np.where(nz & (maxc != r) & (maxc != g), 4.0 + gc - rc, h)
    h = (h / 6.0) % 1.0
    return np.stack([h, s, v], axis=-1)


def hsv_to_rgb(hsv: np.ndarray) -> np.ndarray:
    """Vectorized HSV -> RGB, all channels in [0, 1]."""
    hsv = np.asarray(hsv, dtype=np.float64)
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    i = np.floor(h * 6.0)
    f = h * 6.0 - i
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    i = i.astype(np.int64) % 6

    choices_r = [v, q, p, p, t, v]
    choices_g = [t, v, v, q, p, p]
    choices_b = [p, p, t, v, v, q]
    r = np.select([i == k for k in range(6)], choices_r)
    g = np.select([i == k for k in range(6)], choices_g)
    b = np.select([i == k for k in range(6)], choices_b)
    return np.stack([r, g, b], axis=-1)


def _apply_hsv_shift(img: np.ndarray, dh_degrees: float, ds: float, dv: float) -> np.ndarray:
    """Apply one (hue offset, S factor, V factor) triple to every pixel."""
    hsv = rgb_to_hsv(ensure_raster(img).astype(np.float64) / 255.0)
    hsv[..., 0] = (hsv[..., 0] + dh_degrees / 360.0) % 1.0
    hsv[..., 1] = np.clip(hsv[..., 1] * ds, 0.0, 1.0)
    hsv[..., 2] = np.clip(hsv[..., 2] * dv, 0.0, 1.0)
    rgb = hsv_to_rgb(hsv) * 255.0
    return round_half_up(rgb).clip(0, 255).astype(np.uint8)


def augment_hsv(img: np.ndarray, cfg: AugmentationConfig) -> np.ndarray:
    """Whole-image HSV augmentation, deterministic given the config seed.

    One (dh, ds, dv) triple is drawn and applied to every pixel: dh uniform
    in +-strength*180 degrees (hue wraps), ds and dv uniform multiplicative
    factors in [1-strength, 1+strength] with S/V clamped to [0, 1].
    """
    img = ensure_raster(img)
    if cfg.strength == 0.0:
        return img.copy()
    dh, ds, dv = draw_hsv_triple(cfg)
    return _apply_hsv_shift(img, dh, ds, dv)


def draw_hsv_triple(cfg: AugmentationConfig) -> tuple[float, float, float]:
    """Draw the augmentation triple (dh degrees, ds, dv) for a config."""
    rng = np.random.default_rng(cfg.seed)
    dh = rng.uniform(-cfg.strength * 180.0, cfg.strength * 180.0)
    ds = rng.uniform(1.0 - cfg.strength, 1.0 + cfg.strength)
    dv = rng.uniform(1.0 - cfg.strength, 1.0 + cfg.strength)
    return dh, ds, dv


def replace_luminance(img: np.ndarray, lum: np.ndarray) -> np.ndarray:
    """Substitute the luma of ``img`` with ``lum`` via Y'CbCr, keep chroma.

    Channels are clamped to [0, 255] after reconstruction, so strongly
    saturated pixels may not reach the exact target luma.
    """
    img = ensure_raster(img)
    lum = np.asarray(lum, dtype=np.float64)
    if lum.shape != img.shape[:2]:
        raise DimensionMismatchError(
            f"luma plane {lum.shape} does not match image {img.shape[:2]}"
        )
    rgb = img.astype(np.float64)
    y = rgb @ LUMA_WEIGHTS
    cb = _CB_SCALE * (rgb[:, :, 2] - y)
    cr = _CR_SCALE * (rgb[:, :, 0] - y)

    r = lum + cr / _CR_SCALE
    b = lum + cb / _CB_SCALE
    g = (lum - LUMA_WEIGHTS[0] * r - LUMA_WEIGHTS[2] * b) / LUMA_WEIGHTS[1]
    out = np.stack([r, g, b], axis=-1)
    return round_half_up(out).clip(0, 255).astype(np.uint8)


def mean_color(img: np.ndarray, mask: np.ndarray) -> tuple[int, int, int]:
    """Arithmetic mean RGB over the mask support, rounded half up."""
    img = ensure_raster(img)
    mask = np.asarray(mask)
    if mask.shape != img.shape[:2]:
        raise DimensionMismatchError(
            f"mask {mask.shape} does not match image {img.shape[:2]}"
        )
    sel = mask > 0
    if not sel.any():
        raise EmptyMaskError("mask has no set pixels")
    mean = img[sel].astype(np.float64).mean(axis=0)
    r, g, b = round_half_up(mean).astype(int)
    return int(r), int(g), int(b)

"""Assembly of the 7-channel conditioning stack.

Channel layout (float32, shape (7, H, W)):
  0-2  conditioning RGB in [0, 1]
  3    palette/color indicator: N/256 for dequantization; 1.0 outside and
       1/256 inside the mask for inpainting
  4-5  texture channels (variant-dependent: luminance / gradients /
       thresholded gradients)
  6    binary texture-validity indicator
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyMaskError,
    MissingTextureError,
    OutOfBoundsError,
)
from .image import ensure_raster, gradients, luminance, mean_color, threshold_gradients
from .quantize import IndexedImage, render

GRADIENT_TAU = 8.0  # threshold on the 0..255 luminance scale

# Training-time dropout: whole-image texture and texture-within-mask rates.
TEXTURE_DROPOUT_P = 0.3
MASK_TEXTURE_DROPOUT_P = 0.5


class Variant(Enum):
    NOTEX = "noTex"
    L = "L"
    G = "G"
    T = "T"

    @classmethod
    def parse(cls, text: str) -> "Variant":
        for v in cls:
            if v.value == text:
                return v
        raise ValueError(f"unknown variant {text!r}")


@dataclass(frozen=True)
class MaskSpec:
    """Union of axis-aligned rectangles (top, left, height, width)."""

    rectangles: tuple[tuple[int, int, int, int], ...]

    def __post_init__(self):
        rects = tuple(
            (int(t), int(l), int(h), int(w)) for t, l, h, w in self.rectangles
        )
        for t, l, h, w in rects:
            if t < 0 or l < 0 or h < 0 or w < 0:
                raise OutOfBoundsError(f"negative rectangle field in {(t, l, h, w)}")
        object.__setattr__(self, "rectangles", rects)

    def to_plane(self, height: int, width: int) -> np.ndarray:
        """Binary plane of the rectangle union; rects must fit the bounds."""
        plane = np.zeros((height, width), dtype=np.float64)
        for t, l, h, w in self.rectangles:
            if t + h > height or l + w > width:
                raise OutOfBoundsError(
                    f"rectangle {(t, l, h, w)} exceeds {height}x{width} bounds"
                )
            plane[t : t + h, l : l + w] = 1.0
        return plane


def random_mask(
    height: int,
    width: int,
    seed: int,
    area_range: tuple[float, float] = (0.05, 0.30),
) -> MaskSpec:
    """One random rectangle covering an area fraction uniform in area_range.

    Aspect ratio is log-uniform in [1/2, 2]; position uniform among valid
    placements. Deterministic given the seed.
    """
    lo, hi = area_range
    if not (0 < lo <= hi <= 1):
        raise ValueError(f"area_range must satisfy 0 < lo <= hi <= 1, got {area_range}")
    rng = np.random.default_rng(seed)
    frac = rng.uniform(lo, hi)
    aspect = np.exp(rng.uniform(np.log(0.5), np.log(2.0)))
    area = frac * height * width
    rh = int(np.clip(np.rint(np.sqrt(area * aspect)), 1, height))
    rw = int(np.clip(np.rint(area / rh), 1, width))
    rh = int(np.clip(np.rint(area / rw), 1, height))
    top = int(rng.integers(0, height - rh + 1))
    left = int(rng.integers(0, width - rw + 1))
    return MaskSpec(((top, left, rh, rw),))


def _texture_planes(
    texture_src: np.ndarray, variant: Variant
) -> tuple[np.ndarray, np.ndarray]:
    """Variant-specific texture channels from a source image, own scaling."""
    lum = luminance(texture_src)
    if variant is Variant.L:
        return lum / 255.0, np.zeros_like(lum)
    gx, gy = gradients(lum)
    if variant is Variant.G:
        return gx / 255.0, gy / 255.0
    if variant is Variant.T:
        return threshold_gradients(gx, gy, GRADIENT_TAU)
    return np.zeros_like(lum), np.zeros_like(lum)


def _palette_count(spec) -> int:
    from .quantize import PaletteSpec

    if isinstance(spec, PaletteSpec):
        return spec.n_colors
    return int(spec)


def build_dequant_stack(
    q: IndexedImage,
    spec,
    variant: Variant,
    texture_src: np.ndarray | None = None,
    texture_on: bool = False,
) -> np.ndarray:
    """Conditioning stack for dequantization: quantized RGB + N/256 + texture."""
    n = _palette_count(spec)
    rgb = render(q)
    h, w = rgb.shape[:2]
    stack = np.zeros((7, h, w), dtype=np.float32)
    stack[0:3] = rgb.astype(np.float32).transpose(2, 0, 1) / 255.0
    stack[3] = n / 256.0
    if texture_on and variant is not Variant.NOTEX:
        if texture_src is None:
            raise MissingTextureError("texture_on requires a texture source image")
        texture_src = ensure_raster(texture_src)
        if texture_src.shape[:2] != (h, w):
            raise DimensionMismatchError(
                f"texture source {texture_src.shape[:2]} does not match {h}x{w}"
            )
        ch4, ch5 = _texture_planes(texture_src, variant)
        stack[4] = ch4.astype(np.float32)
        stack[5] = ch5.astype(np.float32)
        stack[6] = 1.0
    return stack


def build_inpaint_stack(
    gt: np.ndarray,
    mask: MaskSpec,
    fill,
    variant: Variant,
    texture_in_mask: bool = True,
) -> np.ndarray:
    """Conditioning stack for color-conditioned inpainting.

    RGB carries the ground truth outside the mask and the fill color inside
    (``fill`` may be an (r, g, b) triple or the string "mean"). The color
    indicator is 1.0 where ground truth is available and 1/256 inside the
    mask. Texture channels come from the ground truth and are zeroed inside
    the mask (indicator 0 there) unless ``texture_in_mask``.
    """
    gt = ensure_raster(gt)
    h, w = gt.shape[:2]
    plane = mask.to_plane(h, w)
    inside = plane > 0

    if isinstance(fill, str):
        if fill != "mean":
            raise ValueError(f"fill must be a color triple or 'mean', got {fill!r}")
        if not inside.any():
            raise EmptyMaskError("mean fill requires a nonempty mask")
        fill_rgb = mean_color(gt, plane)
    else:
        fill_rgb = tuple(int(c) for c in fill)
        if len(fill_rgb) != 3 or any(not 0 <= c <= 255 for c in fill_rgb):
            raise ValueError(f"fill color must be three values in [0, 255], got {fill!r}")

    stack = np.zeros((7, h, w), dtype=np.float32)
    rgb = gt.astype(np.float32) / 255.0
    for c in range(3):
        chan = rgb[:, :, c].copy()
        chan[inside] = fill_rgb[c] / 255.0
        stack[c] = chan
    stack[3] = 1.0
    stack[3][inside] = 1.0 / 256.0

    if variant is not Variant.NOTEX:
        ch4, ch5 = _texture_planes(gt, variant)
        ch6 = np.ones((h, w), dtype=np.float32)
        if not texture_in_mask:
            ch4 = ch4.copy()
            ch5 = ch5.copy()
            ch4[inside] = 0.0
            ch5[inside] = 0.0
            ch6[inside] = 0.0
        stack[4] = ch4.astype(np.float32)
        stack[5] = ch5.astype(np.float32)
        stack[6] = ch6
    return stack


def save_stack(path, stack: np.ndarray, variant: Variant) -> None:
    """Persist a stack: one JSON header line, then raw little-endian f32."""
    stack = np.ascontiguousarray(stack, dtype="<f4")
    header = {"shape": list(stack.shape), "variant": variant.value, "dtype": "<f4"}
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        fh.write(stack.tobytes())


def load_stack(path) -> tuple[np.ndarray, Variant]:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        data = fh.read()
    stack = np.frombuffer(data, dtype=header["dtype"]).reshape(header["shape"])
    return stack.astype(np.float32), Variant.parse(header["variant"])

"""Median-cut palette quantization and nearest-color projection.

The quantizer recursively splits the box with the largest channel range at
the positional median of that channel, over the image's *distinct* colors.
Box representatives are pixel-count-weighted means, so an image with at
most N distinct colors is reproduced exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .image import ensure_raster, round_half_up

PALETTE_SIZES = (4, 8, 16, 32, 64, 128)  # power-of-two range used end to end
TOY_PALETTE_SIZES = (4, 8, 16, 32)  # default for 32x32 evaluation corpora


@dataclass(frozen=True)
class Palette:
    """Ordered list of distinct RGB colors, 1..256 entries."""

    colors: np.ndarray  # (K, 3) uint8

    def __post_init__(self):
        colors = np.asarray(self.colors, dtype=np.uint8)
        if colors.ndim != 2 or colors.shape[1] != 3:
            raise ValueError(f"palette must be (K, 3), got {colors.shape}")
        if not 1 <= len(colors) <= 256:
            raise ValueError(f"palette length must be 1..256, got {len(colors)}")
        if len(np.unique(colors, axis=0)) != len(colors):
            raise ValueError("palette contains duplicate colors")
        object.__setattr__(self, "colors", colors)

    def __len__(self) -> int:
        return len(self.colors)

    def to_list(self) -> list[list[int]]:
        return [[int(c) for c in rgb] for rgb in self.colors]

    @classmethod
    def from_list(cls, triples) -> "Palette":
        return cls(np.asarray(triples, dtype=np.uint8).reshape(-1, 3))

    def to_json(self) -> str:
        return json.dumps(self.to_list())

    @classmethod
    def from_json(cls, text: str) -> "Palette":
        return cls.from_list(json.loads(text))


@dataclass(frozen=True)
class PaletteSpec:
    """Palette size constraint: a power of two in [4, 128]."""

    n_colors: int

    def __post_init__(self):
        n = self.n_colors
        if not (4 <= n <= 128 and (n & (n - 1)) == 0):
            raise ValueError(f"n_colors must be a power of two in [4, 128], got {n}")


@dataclass(frozen=True)
class IndexedImage:
    """Per-pixel palette indices plus the palette itself."""

    indices: np.ndarray  # (H, W) int32
    palette: Palette

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int32)
        if idx.ndim != 2:
            raise ValueError(f"indices must be (H, W), got {idx.shape}")
        if idx.min() < 0 or idx.max() >= len(self.palette):
            raise ValueError("index out of palette range")
        object.__setattr__(self, "indices", idx)

    @property
    def height(self) -> int:
        return self.indices.shape[0]

    @property
    def width(self) -> int:
        return self.indices.shape[1]


def _n_colors(spec) -> int:
    if isinstance(spec, PaletteSpec):
        return spec.n_colors
    n = int(spec)
    if not 1 <= n <= 256:
        raise ValueError(f"color count must be in [1, 256], got {n}")
    return n


def median_cut(img: np.ndarray, spec) -> IndexedImage:
    """Quantize an image to at most N colors.

    ``spec`` is a PaletteSpec or a plain color count in [1, 256] (the CLI
    restricts to the power-of-two range; the library does not).
    """
    img = ensure_raster(img)
    n = _n_colors(spec)
    flat = img.reshape(-1, 3)
    colors, counts = np.unique(flat, axis=0, return_counts=True)
    colors64 = colors.astype(np.int64)

    # Boxes are index arrays into the distinct-color table, in creation order.
    boxes: list[np.ndarray] = [np.arange(len(colors))]
    while len(boxes) < n:
        best, best_range, best_chan = -1, 0, 0
        for bi, box in enumerate(boxes):
            if len(box) < 2:
                continue
            ranges = colors64[box].max(axis=0) - colors64[box].min(axis=0)
            chan = int(np.argmax(ranges))  # ties to lowest channel
            if ranges[chan] > best_range:  # ties to oldest box
                best, best_range, best_chan = bi, int(ranges[chan]), chan
        if best < 0:
            break
        box = boxes[best]
        sub = colors64[box]
        order = np.lexsort((sub[:, 2], sub[:, 1], sub[:, 0], sub[:, best_chan]))
        mid = len(box) // 2
        boxes[best] = box[order[:mid]]
        boxes.append(box[order[mid:]])

    reps = []
    for box in boxes:
        w = counts[box].astype(np.float64)
        mean = (colors64[box] * w[:, None]).sum(axis=0) / w.sum()
        reps.append(round_half_up(mean).clip(0, 255).astype(np.uint8))
    reps = np.asarray(reps, dtype=np.uint8)

    # Positional median splits can yield coinciding means; keep first.
    _, first = np.unique(reps, axis=0, return_index=True)
    reps = reps[np.sort(first)]

    return project_to_palette(img, Palette(reps))


def render(q: IndexedImage) -> np.ndarray:
    """Expand an indexed image back to an (H, W, 3) uint8 raster."""
    return q.palette.colors[q.indices]


def project_to_palette(img: np.ndarray, pal: Palette) -> IndexedImage:
    """Assign each pixel its nearest palette color (squared RGB distance).

    Ties break to the lowest palette index.
    """
    img = ensure_raster(img)
    flat = img.reshape(-1, 3).astype(np.int64)
    pcolors = pal.colors.astype(np.int64)
    p_sq = (pcolors**2).sum(axis=1)
    idx = np.empty(len(flat), dtype=np.int32)
    # Exact integer distances via |x|^2 - 2 x.p + |p|^2, chunked over pixels.
    for lo in range(0, len(flat), 1 << 16):
        chunk = flat[lo : lo + (1 << 16)]
        d2 = (chunk**2).sum(axis=1)[:, None] - 2 * (chunk @ pcolors.T) + p_sq[None, :]
        idx[lo : lo + (1 << 16)] = np.argmin(d2, axis=1)  # first index wins ties
    return IndexedImage(idx.reshape(img.shape[:2]), pal)

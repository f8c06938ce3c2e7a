"""Procedural toy corpora: small images with gradients, shapes, and
smooth noise textures. Every image is a pure function of (seed, index),
so corpora never need to be stored.
"""

from __future__ import annotations

import os

import numpy as np

from .image import load_image, round_half_up


def _rng_for(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def _random_color(rng) -> np.ndarray:
    return rng.integers(0, 256, size=3).astype(np.float64)


def _linear_gradient(rng, size: int) -> np.ndarray:
    c0, c1 = _random_color(rng), _random_color(rng)
    theta = rng.uniform(0, 2 * np.pi)
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64) / max(size - 1, 1)
    t = xx * np.cos(theta) + yy * np.sin(theta)
    t = (t - t.min()) / max(t.max() - t.min(), 1e-9)
    return c0[None, None] * (1 - t[:, :, None]) + c1[None, None] * t[:, :, None]


def _smooth_noise(rng, size: int) -> np.ndarray:
    c0, c1 = _random_color(rng), _random_color(rng)
    coarse = rng.random((4, 4))
    t = _bilinear_upsample(coarse, size)
    return c0[None, None] * (1 - t[:, :, None]) + c1[None, None] * t[:, :, None]


def _bilinear_upsample(coarse: np.ndarray, size: int) -> np.ndarray:
    src = coarse.shape[0]
    pos = np.linspace(0, src - 1, size)
    i0 = np.minimum(pos.astype(np.int64), src - 2)
    f = pos - i0
    rows = coarse[i0] * (1 - f[:, None]) + coarse[i0 + 1] * f[:, None]
    cols = rows[:, i0] * (1 - f[None, :]) + rows[:, i0 + 1] * f[None, :]
    return cols


def _add_shapes(rng, canvas: np.ndarray) -> np.ndarray:
    size = canvas.shape[0]
    yy, xx = np.mgrid[0:size, 0:size]
    for _ in range(int(rng.integers(1, 6))):
        color = _random_color(rng)
        if rng.random() < 0.5:
            h = int(rng.integers(size // 8, size // 2 + 1))
            w = int(rng.integers(size // 8, size // 2 + 1))
            top = int(rng.integers(0, size - h + 1))
            left = int(rng.integers(0, size - w + 1))
            sel = np.zeros((size, size), dtype=bool)
            sel[top : top + h, left : left + w] = True
        else:
            r = int(rng.integers(size // 8, size // 3 + 1))
            cy = int(rng.integers(r, size - r + 1))
            cx = int(rng.integers(r, size - r + 1))
            sel = (yy - cy) ** 2 + (xx - cx) ** 2 <= r * r
        if rng.random() < 0.5:
            # soft radial shading keeps smooth luminance inside the shape
            cy2, cx2 = yy[sel].mean(), xx[sel].mean()
            d = np.sqrt((yy - cy2) ** 2 + (xx - cx2) ** 2)
            shade = 1.0 - 0.5 * (d / max(d[sel].max(), 1.0))
            canvas[sel] = color[None] * shade[sel][:, None]
        else:
            canvas[sel] = color[None]
    return canvas


def toy_image(seed: int, index: int, size: int = 32) -> np.ndarray:
    """Deterministic procedural image: uint8 (size, size, 3)."""
    rng = _rng_for(seed, index)
    kind = rng.random()
    if kind < 0.35:
        canvas = _linear_gradient(rng, size)
    elif kind < 0.55:
        canvas = _smooth_noise(rng, size)
    elif kind < 0.90:
        canvas = _add_shapes(rng, _linear_gradient(rng, size))
    else:
        canvas = _add_shapes(rng, _smooth_noise(rng, size))
    return round_half_up(canvas).clip(0, 255).astype(np.uint8)


class ProceduralDataset:
    """Indexable corpus of toy images, one root seed per corpus."""

    def __init__(self, seed: int, count: int, size: int = 32):
        if count < 0:
            raise ValueError("count must be >= 0")
        self.seed, self.count, self.size = seed, count, size

    def __len__(self) -> int:
        return self.count

    def __getitem__(self, index: int) -> np.ndarray:
        if not 0 <= index < self.count:
            raise IndexError(index)
        return toy_image(self.seed, index, self.size)


class ImageFolderDataset:
    """PNG files from a directory, random-cropped to a fixed size.

    Crops are deterministic per (seed, index); index k uses file k mod n.
    """

    def __init__(self, path, size: int = 32, seed: int = 0, samples_per_file: int = 16):
        self.paths = sorted(
            os.path.join(path, f) for f in os.listdir(path) if f.lower().endswith(".png")
        )
        if not self.paths:
            raise ValueError(f"no PNG files in {path}")
        self.size, self.seed = size, seed
        self.samples_per_file = samples_per_file
        self._cache: dict[str, np.ndarray] = {}

    def __len__(self) -> int:
        return len(self.paths) * self.samples_per_file

    def __getitem__(self, index: int) -> np.ndarray:
        if not 0 <= index < len(self):
            raise IndexError(index)
        path = self.paths[index % len(self.paths)]
        img = self._cache.get(path)
        if img is None:
            img = load_image(path)
            self._cache[path] = img
        h, w = img.shape[:2]
        if h < self.size or w < self.size:
            raise ValueError(f"{path} is smaller than crop size {self.size}")
        rng = _rng_for(self.seed, index)
        top = int(rng.integers(0, h - self.size + 1))
        left = int(rng.integers(0, w - self.size + 1))
        return img[top : top + self.size, left : left + self.size].copy()

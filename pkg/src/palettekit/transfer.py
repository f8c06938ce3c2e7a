"""Palette transfer: weighted bipartite matching between color palettes.

The matcher is the classic O(n^3) potentials algorithm. Costs are exact
int64 squared RGB distances (negated for the dissimilar-color mode), so
optimality and tie comparisons are exact. Among cost-equal optima the
lexicographically smallest mapping is returned.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import SizeMismatchError
from .image import round_half_up
from .quantize import IndexedImage, Palette


class TransferMode(Enum):
    COLOR = "color"
    NEGATIVE_COLOR = "negative-color"

    @classmethod
    def parse(cls, text: str) -> "TransferMode":
        for mode in cls:
            if mode.value == text:
                return mode
        raise ValueError(f"unknown transfer mode {text!r}")


@dataclass(frozen=True)
class Assignment:
    """Bijective source-index -> target-index mapping."""

    mapping: np.ndarray  # (n,) int64 permutation

    def __post_init__(self):
        m = np.asarray(self.mapping, dtype=np.int64)
        if sorted(m.tolist()) != list(range(len(m))):
            raise ValueError("mapping is not a permutation")
        object.__setattr__(self, "mapping", m)


def build_cost(src: Palette, tgt: Palette, mode: TransferMode) -> np.ndarray:
    """Pairwise squared RGB distances, negated in NEGATIVE_COLOR mode."""
    if len(src) != len(tgt):
        raise SizeMismatchError(
            f"palette sizes differ: {len(src)} vs {len(tgt)}"
        )
    a = src.colors.astype(np.int64)
    b = tgt.colors.astype(np.int64)
    d2 = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
    return -d2 if mode is TransferMode.NEGATIVE_COLOR else d2


def _hungarian(cost: np.ndarray) -> tuple[np.ndarray, int]:
    """Minimum-cost perfect matching via row potentials.

    Returns (mapping row->col, total cost). Entries may be negative.
    """
    n = cost.shape[0]
    if n == 0:
        return np.empty(0, dtype=np.int64), 0
    # 1-based potentials; p[j] = row matched to column j.
    INF = np.iinfo(np.int64).max if np.issubdtype(cost.dtype, np.integer) else np.inf
    c = cost
    u = np.zeros(n + 1, dtype=c.dtype)
    v = np.zeros(n + 1, dtype=c.dtype)
    p = np.zeros(n + 1, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, INF, dtype=c.dtype)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used[1:]
            cur = c[i0 - 1, :] - u[i0] - v[1:]
            better = free & (cur < minv[1:])
            minv[1:][better] = cur[better]
            way[1:][better] = j0
            masked = np.where(free, minv[1:], INF)
            j1 = int(np.argmin(masked)) + 1
            delta = masked[j1 - 1]
            u[p[used]] += delta
            v[used] -= delta
            minv[1:][free] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0 != 0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    mapping = np.empty(n, dtype=np.int64)
    mapping[p[1:] - 1] = np.arange(n)
    total = c[np.arange(n), mapping].sum()
    return mapping, total


def _as_cost_array(cost: np.ndarray) -> np.ndarray:
    c = np.asarray(cost)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError(f"cost matrix must be square, got {c.shape}")
    if np.issubdtype(c.dtype, np.integer):
        return c.astype(np.int64)
    return c.astype(np.float64)


def solve_assignment(cost: np.ndarray) -> Assignment:
    """Minimum-total-cost bijection; lexicographically smallest among optima.

    The refinement fixes rows in order, testing smaller column choices
    against the optimal completion of the reduced problem; a per-row
    column-minimum lower bound prunes most candidates.
    """
    c = _as_cost_array(cost)
    n = c.shape[0]
    mapping = np.empty(n, dtype=np.int64)
    free = list(range(n))
    _, target = _hungarian(c)
    for i in range(n):
        rest_rows = np.arange(i + 1, n)
        chosen = None
        for j in free:
            if i == n - 1:
                if c[i, j] == target:
                    chosen, target = j, target - c[i, j]
                    break
                continue
            rest_cols = [col for col in free if col != j]
            sub = c[np.ix_(rest_rows, rest_cols)]
            if c[i, j] + sub.min(axis=1).sum() > target:
                continue
            _, reduced = _hungarian(sub)
            if c[i, j] + reduced == target:
                chosen, target = j, reduced
                break
        assert chosen is not None, "optimal completion must exist"
        mapping[i] = chosen
        free.remove(chosen)
    return Assignment(mapping)


def transfer_palette(q: IndexedImage, tgt: Palette, mode: TransferMode) -> IndexedImage:
    """Remap a quantized image's palette onto matched target colors.

    Index structure is untouched; palette entry i becomes tgt[mapping(i)].
    """
    if len(tgt) != len(q.palette):
        raise SizeMismatchError(
            f"target palette size {len(tgt)} != source {len(q.palette)}"
        )
    assignment = solve_assignment(build_cost(q.palette, tgt, mode))
    new_colors = tgt.colors[assignment.mapping]
    return IndexedImage(q.indices.copy(), Palette(new_colors))


def resample_colormap(stops, n: int) -> Palette:
    """Sample n palette colors along a colormap at t_k = k/(n-1).

    Linear interpolation between stops; coinciding samples are nudged on
    the red channel (mod 256) until distinct.
    """
    stops = np.asarray(stops, dtype=np.float64).reshape(-1, 3)
    if len(stops) == 0:
        raise ValueError("colormap must have at least one stop")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n == 1 or len(stops) == 1:
        samples = np.repeat(stops[:1], n, axis=0)
    else:
        t = np.arange(n) / (n - 1)
        pos = t * (len(stops) - 1)
        i0 = np.minimum(pos.astype(np.int64), len(stops) - 2)
        frac = pos - i0
        samples = stops[i0] * (1.0 - frac[:, None]) + stops[i0 + 1] * frac[:, None]
    colors = round_half_up(samples).clip(0, 255).astype(np.int64)

    seen: set[tuple[int, int, int]] = set()
    out = []
    for rgb in colors:
        r, g, b = int(rgb[0]), int(rgb[1]), int(rgb[2])
        while (r, g, b) in seen:
            r = (r + 1) % 256
        seen.add((r, g, b))
        out.append((r, g, b))
    return Palette(np.asarray(out, dtype=np.uint8))


def load_colormap(path) -> np.ndarray:
    """Read a colormap JSON file: an ordered array of [r, g, b] stops."""
    with open(path, "r", encoding="utf-8") as fh:
        stops = json.load(fh)
    arr = np.asarray(stops, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"colormap must be an array of [r,g,b] stops, got {arr.shape}")
    return arr

"""Image quality metrics: PSNR, single-scale SSIM on luminance, and the
palette-error proxy used when no ground truth exists."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DimensionMismatchError, TooSmallError
from .image import ensure_raster, luminance
from .quantize import IndexedImage, median_cut, project_to_palette, render

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
DYNAMIC_RANGE = 255.0


@dataclass(frozen=True)
class MetricReport:
    psnr: float
    ssim: float


@dataclass(frozen=True)
class Aggregate:
    mean: float
    standard_error: float
    n: int


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """10 log10(255^2 / MSE) over all channels; +inf when identical."""
    a = ensure_raster(a)
    b = ensure_raster(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"{a.shape} vs {b.shape}")
    mse = np.mean((a.astype(np.float64) - b.astype(np.float64)) ** 2)
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(DYNAMIC_RANGE**2 / mse)


def _gaussian_kernel(n: int, sigma: float) -> np.ndarray:
    x = np.arange(n, dtype=np.float64) - (n - 1) / 2.0
    k = np.exp(-(x**2) / (2.0 * sigma**2))
    return k / k.sum()


def _filter_valid(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Separable valid-region convolution with a symmetric 1-D kernel."""
    tmp = sliding_window_view(plane, len(kernel), axis=1) @ kernel
    return np.ascontiguousarray(
        sliding_window_view(tmp, len(kernel), axis=0) @ kernel
    )


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean SSIM over valid 11x11 Gaussian windows of the luminance planes."""
    a = ensure_raster(a)
    b = ensure_raster(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"{a.shape} vs {b.shape}")
    if min(a.shape[:2]) < SSIM_WINDOW:
        raise TooSmallError(f"min side {min(a.shape[:2])} < window {SSIM_WINDOW}")
    x = luminance(a)
    y = luminance(b)
    k = _gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA)
    mu_x = _filter_valid(x, k)
    mu_y = _filter_valid(y, k)
    var_x = _filter_valid(x * x, k) - mu_x**2
    var_y = _filter_valid(y * y, k) - mu_y**2
    cov = _filter_valid(x * y, k) - mu_x * mu_y
    c1 = (SSIM_K1 * DYNAMIC_RANGE) ** 2
    c2 = (SSIM_K2 * DYNAMIC_RANGE) ** 2
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x**2 + mu_y**2 + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def palette_error(
    gen: np.ndarray, q_in: IndexedImage, spec, mode: str = "fresh"
) -> MetricReport:
    """Compare the quantized generated image against the quantized input.

    ``fresh`` re-quantizes the generated image at the given palette size;
    ``project`` snaps it onto the input's own palette.
    """
    gen = ensure_raster(gen)
    ref = render(q_in)
    if gen.shape != ref.shape:
        raise DimensionMismatchError(f"{gen.shape} vs {ref.shape}")
    if mode == "fresh":
        quantized = render(median_cut(gen, spec))
    elif mode == "project":
        quantized = render(project_to_palette(gen, q_in.palette))
    else:
        raise ValueError(f"mode must be 'fresh' or 'project', got {mode!r}")
    return MetricReport(psnr=psnr(quantized, ref), ssim=ssim(quantized, ref))


def aggregate(values) -> Aggregate:
    """Mean and standard error (sample stddev / sqrt(n))."""
    vals = np.asarray(list(values), dtype=np.float64)
    if len(vals) == 0:
        raise ValueError("aggregate requires at least one value")
    mean = float(vals.mean())
    if len(vals) == 1 or np.all(vals == vals[0]):
        se = 0.0
    else:
        se = float(vals.std(ddof=1) / math.sqrt(len(vals)))
    return Aggregate(mean=mean, standard_error=se, n=len(vals))

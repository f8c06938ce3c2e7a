"""Ancestral DDPM sampling with respaced timesteps and dynamic thresholding."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..conditioning import Variant, build_dequant_stack
from ..errors import ShapeMismatchError
from ..image import luminance, replace_luminance, round_half_up
from ..quantize import IndexedImage
from .schedule import NoiseSchedule


@dataclass(frozen=True)
class SamplerConfig:
    steps: int = 27
    thresholding_p: float = 0.95
    thresholding_c: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if not 0 < self.thresholding_p <= 1:
            raise ValueError(f"p must be in (0, 1], got {self.thresholding_p}")
        if self.thresholding_c <= 0:
            raise ValueError(f"c must be > 0, got {self.thresholding_c}")


def dynamic_threshold(x0_hat: np.ndarray, p: float, c: float) -> np.ndarray:
    """Clip to the p-th absolute-value quantile (at least c), rescale to [-c, c]."""
    s = max(float(np.quantile(np.abs(x0_hat), p)), c)
    return np.clip(x0_hat, -s, s) * (c / s)


def respaced_timesteps(T: int, steps: int) -> np.ndarray:
    """Descending timesteps, ``steps`` of them spread evenly over [0, T)."""
    if steps > T:
        raise ValueError(f"steps {steps} exceeds schedule length {T}")
    return np.rint(np.linspace(T - 1, 0, steps)).astype(np.int64)


def sample_batch(
    denoiser,
    conds: np.ndarray | None,
    sched: NoiseSchedule,
    scfg: SamplerConfig,
    seeds,
    shape: tuple[int, int] | None = None,
) -> np.ndarray:
    """Sample a batch; each image owns the random stream of its seed.

    ``conds`` is (B, 7, H, W) or None for unconditional sampling (then
    ``shape`` gives (H, W)). Returns (B, H, W, 3) uint8.
    """
    if conds is not None:
        b = conds.shape[0]
        h, w = conds.shape[2], conds.shape[3]
        conds = conds.astype(np.float32)
    else:
        if shape is None:
            raise ShapeMismatchError("shape required for unconditional sampling")
        h, w = shape
        b = len(seeds)
    if len(seeds) != b:
        raise ShapeMismatchError(f"{len(seeds)} seeds for batch of {b}")

    rngs = [np.random.default_rng(int(s)) for s in seeds]
    ts = respaced_timesteps(sched.T, scfg.steps)
    x = np.stack([r.standard_normal((h, w, 3), dtype=np.float32) for r in rngs])
    # the encoder only sees the conditioning, so its residuals are loop-invariant
    residuals = None
    if conds is not None:
        if conds.shape[2:] != (h, w):
            raise ShapeMismatchError(f"conditioning {conds.shape[2:]} vs image {(h, w)}")
        residuals = denoiser.encode_cond(conds)
    for k, t in enumerate(ts):
        eps = denoiser.predict_eps(x, int(t), residuals=residuals)
        abar_t = float(sched.alpha_bars[t])
        x0 = (x - np.float32(np.sqrt(1.0 - abar_t)) * eps) / np.float32(np.sqrt(abar_t))
        x0 = np.stack(
            [dynamic_threshold(x0[i], scfg.thresholding_p, scfg.thresholding_c) for i in range(b)]
        ).astype(np.float32)
        if k == len(ts) - 1:
            x = x0
            break
        abar_prev = float(sched.alpha_bars[ts[k + 1]])
        beta_eff = 1.0 - abar_t / abar_prev
        coef_x0 = np.float32(np.sqrt(abar_prev) * beta_eff / (1.0 - abar_t))
        coef_xt = np.float32(np.sqrt(abar_t / abar_prev) * (1.0 - abar_prev) / (1.0 - abar_t))
        std = np.float32(np.sqrt(beta_eff * (1.0 - abar_prev) / (1.0 - abar_t)))
        noise = np.stack([r.standard_normal((h, w, 3), dtype=np.float32) for r in rngs])
        x = coef_x0 * x0 + coef_xt * x + std * noise
    out = x.astype(np.float64)
    return round_half_up((out + 1.0) * 127.5).clip(0, 255).astype(np.uint8)


def sample(denoiser, cond: np.ndarray | None, sched: NoiseSchedule, scfg: SamplerConfig,
           shape: tuple[int, int] | None = None) -> np.ndarray:
    """Sample one image; deterministic given the config seed."""
    conds = cond[None] if cond is not None else None
    return sample_batch(denoiser, conds, sched, scfg, [scfg.seed], shape)[0]


def dequantize(
    ckpt,
    q: IndexedImage,
    spec,
    variant: Variant,
    texture_src: np.ndarray | None = None,
    texture_on: bool = False,
    scfg: SamplerConfig = SamplerConfig(),
    l_post: bool = False,
    denoiser=None,
) -> np.ndarray:
    """Quantized image -> natural image: build the stack, sample, and
    optionally enforce the source luminance as a post-process."""
    stack = build_dequant_stack(q, spec, variant, texture_src, texture_on)
    if denoiser is None:
        denoiser = ckpt.build()
    out = sample(denoiser, stack, ckpt.schedule, scfg)
    if l_post:
        if texture_src is None:
            raise ShapeMismatchError("luminance post-process requires a texture source")
        out = replace_luminance(out, luminance(texture_src))
    return out

"""DDPM noise schedule and forward process."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidScheduleError, ShapeMismatchError


@dataclass(frozen=True)
class NoiseSchedule:
    """Forward-process constants: betas, alphas, and cumulative products."""

    T: int
    betas: np.ndarray
    alphas: np.ndarray
    alpha_bars: np.ndarray
    kind: str = "linear"

    def __post_init__(self):
        betas = np.asarray(self.betas, dtype=np.float64)
        alphas = np.asarray(self.alphas, dtype=np.float64)
        abars = np.asarray(self.alpha_bars, dtype=np.float64)
        if not (len(betas) == len(alphas) == len(abars) == self.T):
            raise InvalidScheduleError("schedule arrays must all have length T")
        if np.any(betas <= 0) or np.any(betas >= 1):
            raise InvalidScheduleError("betas must lie in (0, 1)")
        if np.any(abars <= 0) or np.any(abars >= 1):
            raise InvalidScheduleError("alpha_bars must lie in (0, 1)")
        if self.T > 1 and not np.all(np.diff(abars) < 0):
            raise InvalidScheduleError("alpha_bars must be strictly decreasing")
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "alpha_bars", abars)


def make_schedule(T: int, kind: str = "linear") -> NoiseSchedule:
    """Build a schedule: 'linear' beta ramp 1e-4..0.02 or squared-cosine."""
    if T < 1:
        raise InvalidScheduleError(f"T must be >= 1, got {T}")
    if kind == "linear":
        betas = np.linspace(1e-4, 0.02, T)
    elif kind == "cosine":
        steps = np.arange(T + 1, dtype=np.float64) / T
        f = np.cos((steps + 0.008) / 1.008 * np.pi / 2.0) ** 2
        abar = f / f[0]
        betas = np.clip(1.0 - abar[1:] / abar[:-1], 1e-8, 0.999)
    else:
        raise InvalidScheduleError(f"unknown schedule kind {kind!r}")
    alphas = 1.0 - betas
    alpha_bars = np.cumprod(alphas)
    return NoiseSchedule(T=T, betas=betas, alphas=alphas, alpha_bars=alpha_bars, kind=kind)


def q_sample(x0: np.ndarray, t, eps: np.ndarray, sched: NoiseSchedule) -> np.ndarray:
    """Forward diffusion: x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) eps.

    ``t`` may be a scalar or a per-sample array matching the batch axis.
    """
    x0 = np.asarray(x0)
    eps = np.asarray(eps)
    if x0.shape != eps.shape:
        raise ShapeMismatchError(f"x0 {x0.shape} vs eps {eps.shape}")
    abar = sched.alpha_bars[np.asarray(t)]
    if np.ndim(abar) > 0:
        abar = abar.reshape((-1,) + (1,) * (x0.ndim - 1))
    return np.sqrt(abar) * x0 + np.sqrt(1.0 - abar) * eps

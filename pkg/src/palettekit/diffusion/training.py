"""Training loops: unconditional base pretraining and control-encoder
training over a mix of dequantization and inpainting tasks.

Both loops are deterministic given their seed: initialization, batch
selection, timesteps, noise, and task draws all come from seeded
generators. Only the control training updates encoder parameters; the
base hash is verified unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..conditioning import (
    MASK_TEXTURE_DROPOUT_P,
    TEXTURE_DROPOUT_P,
    Variant,
    build_dequant_stack,
    build_inpaint_stack,
    random_mask,
)
from ..errors import EmptyDatasetError, FrozenViolationError
from ..quantize import TOY_PALETTE_SIZES, median_cut
from .checkpoint import Checkpoint, base_hash, snapshot_params
from .model import ControlEncoder, ModelConfig, UNet
from .schedule import NoiseSchedule, q_sample

# Full-scale reference defaults, kept for the record; they tune a model
# several orders of magnitude larger and stall a desk-scale one.
FULLSCALE_BATCH_SIZE = 12
FULLSCALE_LEARNING_RATE = 1e-5


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 16
    learning_rate: float = 1e-4
    weight_decay: float = 0.0


class Adam:
    """Decoupled-weight-decay Adam over a fixed parameter dict."""

    def __init__(self, params, lr, betas=(0.9, 0.999), eps=1e-8, weight_decay=0.0):
        self.items = sorted(params.items())
        self.lr, self.betas, self.eps, self.wd = lr, betas, eps, weight_decay
        self.m = {n: np.zeros_like(p.value) for n, p in self.items}
        self.v = {n: np.zeros_like(p.value) for n, p in self.items}
        self.t = 0

    def step(self):
        self.t += 1
        b1, b2 = self.betas
        c1 = 1.0 - b1**self.t
        c2 = 1.0 - b2**self.t
        for name, p in self.items:
            g = p.grad
            m = self.m[name]
            v = self.v[name]
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            if self.wd:
                p.value *= 1.0 - self.lr * self.wd
            p.value -= (self.lr / c1) * m / (np.sqrt(v / c2) + self.eps)

    def zero_grad(self):
        for _, p in self.items:
            p.grad[...] = 0.0


def to_model_range(img: np.ndarray) -> np.ndarray:
    """uint8 (H, W, 3) -> float32 (H, W, 3) in [-1, 1]."""
    return (img.astype(np.float32) / 127.5) - 1.0


def from_model_range(x: np.ndarray) -> np.ndarray:
    """float (..., H, W, 3) in [-1, 1] -> uint8 (..., H, W, 3)."""
    x = np.asarray(x, dtype=np.float64)
    return np.floor((x + 1.0) * 127.5 + 0.5).clip(0, 255).astype(np.uint8)


def _mse_and_grad(pred: np.ndarray, target: np.ndarray):
    diff = pred - target
    loss = float(np.mean(diff.astype(np.float64) ** 2))
    dout = (2.0 / diff.size) * diff
    return loss, dout


def train_base(
    dataset,
    config: ModelConfig,
    schedule: NoiseSchedule,
    steps: int,
    seed: int,
    train_cfg: TrainConfig = TrainConfig(),
) -> Checkpoint:
    """Unconditional noise-prediction pretraining of the base network."""
    if len(dataset) == 0:
        raise EmptyDatasetError("training dataset is empty")
    init_rng, data_rng = _rngs(seed)
    model = UNet(config, rng=init_rng)
    params = dict(model.named_params())
    opt = Adam(params, train_cfg.learning_rate, weight_decay=train_cfg.weight_decay)
    curve = []
    for step in range(steps):
        x0, t, eps = _draw_noise_batch(dataset, data_rng, train_cfg.batch_size, schedule)
        x_t = q_sample(x0, t, eps, schedule).astype(np.float32)
        temb = model.embed_time(t, len(t))
        pred = model.forward(x_t, temb)
        loss, dout = _mse_and_grad(pred, eps)
        model.backward(dout)
        opt.step()
        opt.zero_grad()
        curve.append((step, loss))
    return Checkpoint(
        config=config,
        schedule=schedule,
        variant=None,
        base_params=snapshot_params(model),
        metadata={"kind": "base", "steps": steps, "seed": seed, "loss_curve": curve},
    )


def train_control(
    dataset,
    base_ckpt: Checkpoint,
    variant: Variant,
    task_mix: tuple[float, float] = (0.5, 0.5),
    steps: int = 1000,
    seed: int = 0,
    train_cfg: TrainConfig = TrainConfig(),
    palette_sizes=TOY_PALETTE_SIZES,
) -> Checkpoint:
    """Train the control encoder against a frozen base.

    Per sample a task is drawn from ``task_mix`` (dequantize, inpaint):
    dequantization quantizes at a random palette size with whole-image
    texture dropout; inpainting masks a random rectangle, fills it with
    the mean color, and may drop texture inside the mask.
    """
    if len(dataset) == 0:
        raise EmptyDatasetError("training dataset is empty")
    if abs(task_mix[0] + task_mix[1] - 1.0) > 1e-9:
        raise ValueError(f"task_mix must sum to 1, got {task_mix}")
    frozen_before = base_ckpt.base_hash()
    init_rng, data_rng = _rngs(seed)
    denoiser = base_ckpt.build()
    base = denoiser.base
    encoder = ControlEncoder(base_ckpt.config, rng=init_rng)
    denoiser.encoder = encoder
    schedule = base_ckpt.schedule
    enc_params = dict(encoder.named_params())
    base_params = dict(base.named_params())
    opt = Adam(enc_params, train_cfg.learning_rate, weight_decay=train_cfg.weight_decay)
    counters = {"dequant": 0, "inpaint": 0}
    curve = []
    cache: dict = {}
    for step in range(steps):
        idx = data_rng.integers(0, len(dataset), size=train_cfg.batch_size)
        x0, cond = assemble_control_batch(
            dataset, idx, variant, data_rng, task_mix, palette_sizes, counters, cache
        )
        t = data_rng.integers(0, schedule.T, size=len(idx))
        eps = data_rng.standard_normal(x0.shape, dtype=np.float32)
        x_t = q_sample(x0, t, eps, schedule).astype(np.float32)
        pred = denoiser.predict_eps(x_t, t, cond, remember=True)
        loss, dout = _mse_and_grad(pred, eps)
        _, dres = base.backward(dout)
        encoder.backward(dres)
        opt.step()
        opt.zero_grad()
        for p in base_params.values():
            p.grad[...] = 0.0
        curve.append((step, loss))
    ckpt = Checkpoint(
        config=base_ckpt.config,
        schedule=schedule,
        variant=variant.value,
        base_params=snapshot_params(base),
        control_params=snapshot_params(encoder),
        metadata={
            "kind": "control",
            "steps": steps,
            "seed": seed,
            "task_counts": counters,
            "loss_curve": curve,
        },
    )
    if ckpt.base_hash() != frozen_before:
        raise FrozenViolationError("base parameters changed during control training")
    return ckpt


def assemble_control_batch(
    dataset,
    indices,
    variant: Variant,
    rng: np.random.Generator,
    task_mix=(0.5, 0.5),
    palette_sizes=TOY_PALETTE_SIZES,
    counters: dict | None = None,
    cache: dict | None = None,
):
    """Build (x0, cond) arrays for a batch of control-training samples."""
    xs, conds = [], []
    for i in indices:
        img = dataset[int(i)]
        h, w = img.shape[:2]
        if rng.random() < task_mix[0]:
            n = int(rng.choice(palette_sizes))
            key = (int(i), n)
            q = cache.get(key) if cache is not None else None
            if q is None:
                q = median_cut(img, n)
                if cache is not None:
                    cache[key] = q
            texture_on = variant is not Variant.NOTEX and rng.random() >= TEXTURE_DROPOUT_P
            stack = build_dequant_stack(q, n, variant, texture_src=img, texture_on=texture_on)
            if counters is not None:
                counters["dequant"] += 1
        else:
            mask = random_mask(h, w, seed=int(rng.integers(0, 2**63)))
            texture_in_mask = rng.random() >= MASK_TEXTURE_DROPOUT_P
            stack = build_inpaint_stack(img, mask, "mean", variant, texture_in_mask)
            if counters is not None:
                counters["inpaint"] += 1
        xs.append(to_model_range(img))
        conds.append(stack)
    return np.stack(xs), np.stack(conds)


def heldout_control_loss(
    denoiser,
    schedule: NoiseSchedule,
    dataset,
    variant: Variant,
    seed: int,
    batches: int = 8,
    batch_size: int = 16,
    task_mix=(0.5, 0.5),
    palette_sizes=TOY_PALETTE_SIZES,
) -> float:
    """Mean conditioned noise-prediction MSE on fixed held-out draws."""
    rng = np.random.default_rng(seed)
    total = 0.0
    for _ in range(batches):
        idx = rng.integers(0, len(dataset), size=batch_size)
        x0, cond = assemble_control_batch(dataset, idx, variant, rng, task_mix, palette_sizes)
        t = rng.integers(0, schedule.T, size=batch_size)
        eps = rng.standard_normal(x0.shape, dtype=np.float32)
        x_t = q_sample(x0, t, eps, schedule).astype(np.float32)
        pred = denoiser.predict_eps(x_t, t, cond, remember=False)
        total += float(np.mean((pred.astype(np.float64) - eps) ** 2))
    return total / batches


def _rngs(seed: int):
    ss = np.random.SeedSequence(seed)
    init_ss, data_ss = ss.spawn(2)
    return np.random.default_rng(init_ss), np.random.default_rng(data_ss)


def _draw_noise_batch(dataset, rng, batch_size, schedule):
    idx = rng.integers(0, len(dataset), size=batch_size)
    x0 = np.stack([to_model_range(dataset[int(i)]) for i in idx])
    t = rng.integers(0, schedule.T, size=batch_size)
    eps = rng.standard_normal(x0.shape, dtype=np.float32)
    return x0, t, eps

"""Desk-scale conditional denoising-diffusion dequantizer.

A small U-shaped noise predictor (the frozen base) plus a zero-initialized
trainable control encoder that injects conditioning features at each
spatial scale. Everything is plain numpy with hand-written backprop.
"""

from .schedule import NoiseSchedule, make_schedule, q_sample
from .model import ModelConfig, UNet, ControlEncoder, ConditionedDenoiser
from .checkpoint import Checkpoint, save_checkpoint, load_checkpoint, base_hash
from .training import TrainConfig, train_base, train_control, heldout_control_loss
from .sampling import SamplerConfig, dynamic_threshold, sample, sample_batch, dequantize

__all__ = [
    "NoiseSchedule",
    "make_schedule",
    "q_sample",
    "ModelConfig",
    "UNet",
    "ControlEncoder",
    "ConditionedDenoiser",
    "Checkpoint",
    "save_checkpoint",
    "load_checkpoint",
    "base_hash",
    "TrainConfig",
    "train_base",
    "train_control",
    "heldout_control_loss",
    "SamplerConfig",
    "dynamic_threshold",
    "sample",
    "sample_batch",
    "dequantize",
]

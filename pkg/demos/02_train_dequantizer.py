"""Walkthrough: train the base diffusion model and a control encoder.

Uses a reduced budget so it finishes in a few minutes on a laptop CPU;
raise --steps for the quality used by the acceptance suite (1200 base /
1000 control at 32x32). Checkpoints land in demos/out/.
"""

import argparse
import os
import time

import numpy as np

from palettekit.conditioning import Variant
from palettekit.data import ProceduralDataset
from palettekit.diffusion import (
    ModelConfig,
    TrainConfig,
    make_schedule,
    save_checkpoint,
    train_base,
    train_control,
)

parser = argparse.ArgumentParser()
parser.add_argument("--base-steps", type=int, default=300)
parser.add_argument("--control-steps", type=int, default=250)
parser.add_argument("--variant", default="T", choices=[v.value for v in Variant])
args = parser.parse_args()

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

train_set = ProceduralDataset(seed=7, count=4096, size=32)
config = ModelConfig()  # 32x32, 32 base channels, multipliers (1, 2, 2)
schedule = make_schedule(1000, "linear")
recipe = TrainConfig(batch_size=16, learning_rate=3e-4)

t0 = time.time()
base = train_base(train_set, config, schedule, steps=args.base_steps, seed=0, train_cfg=recipe)
curve = base.metadata["loss_curve"]
print(f"base: {time.time()-t0:.0f}s, loss {curve[0][1]:.3f} -> "
      f"{np.mean([l for _, l in curve[-20:]]):.3f}")
save_checkpoint(f"{OUT}/base.ckpt", base)

t0 = time.time()
ctrl = train_control(
    train_set, base, Variant.parse(args.variant),
    task_mix=(0.5, 0.5),  # half dequantization, half inpainting samples
    steps=args.control_steps, seed=1, train_cfg=recipe,
)
curve = ctrl.metadata["loss_curve"]
print(f"control {args.variant}: {time.time()-t0:.0f}s, loss {curve[0][1]:.3f} -> "
      f"{np.mean([l for _, l in curve[-20:]]):.3f}")
print(f"task mix counted: {ctrl.metadata['task_counts']}")
assert ctrl.base_hash() == base.base_hash(), "base must stay frozen"
save_checkpoint(f"{OUT}/{args.variant}.ckpt", ctrl)
print(f"checkpoints in {OUT}/: base.ckpt, {args.variant}.ckpt")

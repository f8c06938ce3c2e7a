import time
import numpy as np
from palettekit.conditioning import Variant
from palettekit.data import ProceduralDataset
from palettekit.diffusion import TrainConfig, load_checkpoint, train_control, heldout_control_loss, SamplerConfig
from palettekit.diffusion.model import ControlEncoder
from palettekit.diffusion.sampling import sample_batch
from palettekit.conditioning import build_dequant_stack
from palettekit.quantize import median_cut, render
from palettekit.metrics import ssim
from palettekit.diffusion import save_checkpoint

base = load_checkpoint("/root/pkg/.calib/base.ckpt")
ds = ProceduralDataset(seed=7, count=4096, size=32)
heldout = ProceduralDataset(seed=1000, count=512, size=32)
sched = base.schedule

zero = base.build()
zero.encoder = ControlEncoder(base.config, rng=np.random.default_rng(0))
lz = heldout_control_loss(zero, sched, heldout, Variant.L, seed=9, batches=8)
print(f"zero-init heldout: {lz:.4f}", flush=True)

t0 = time.time()
ctrl = train_control(ds, base, Variant.L, steps=1000, seed=1,
                     train_cfg=TrainConfig(batch_size=16, learning_rate=1e-3))
dt = time.time() - t0
lt = heldout_control_loss(ctrl.build(), sched, heldout, Variant.L, seed=9, batches=8)
print(f"lr=1e-3 steps=1000: {dt:.0f}s heldout {lt:.4f} reduction {(1-lt/lz)*100:.1f}%", flush=True)
save_checkpoint("/root/pkg/.calib/L_lr3.ckpt", ctrl)

# quick dequant quality check at N=4 on 32 images
den = ctrl.build()
imgs = [heldout[i] for i in range(32)]
qs = [median_cut(im, 4) for im in imgs]
stacks = np.stack([build_dequant_stack(q, 4, Variant.NOTEX) for q in qs])
gens = sample_batch(den, stacks, sched, SamplerConfig(steps=27, seed=0), seeds=list(range(32)))
m = np.mean([ssim(g, im) for g, im in zip(gens, imgs)])
i = np.mean([ssim(render(q), im) for q, im in zip(qs, imgs)])
print(f"N=4 dequant ssim: model {m:.4f} identity {i:.4f}", flush=True)

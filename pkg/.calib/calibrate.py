import json, time
import numpy as np
from palettekit.conditioning import Variant
from palettekit.data import ProceduralDataset
from palettekit.diffusion import (ModelConfig, TrainConfig, make_schedule, save_checkpoint,
                                  train_base, train_control, heldout_control_loss)
from palettekit.diffusion.model import ControlEncoder
from palettekit.evalharness import ExperimentConfig, eval_dequant, eval_inpaint, eval_palette_transfer
from palettekit.transfer import TransferMode

OUT = "/root/pkg/.calib"
t_all = time.time()
ds = ProceduralDataset(seed=7, count=4096, size=32)
cfg = ModelConfig()
sched = make_schedule(1000)
tc = TrainConfig(batch_size=16, learning_rate=3e-4)

t0 = time.time()
base = train_base(ds, cfg, sched, steps=1200, seed=0, train_cfg=tc)
print(f"base: {time.time()-t0:.0f}s, last-50 loss {np.mean([l for _, l in base.metadata['loss_curve'][-50:]]):.4f}", flush=True)
save_checkpoint(f"{OUT}/base.ckpt", base)

heldout = ProceduralDataset(seed=1000, count=512, size=32)
for variant in (Variant.L, Variant.T):
    t0 = time.time()
    ctrl = train_control(ds, base, variant, steps=1000, seed=1, train_cfg=tc)
    dt = time.time()-t0
    save_checkpoint(f"{OUT}/{variant.value}.ckpt", ctrl)
    zero = base.build(); zero.encoder = ControlEncoder(cfg, rng=np.random.default_rng(0))
    lz = heldout_control_loss(zero, sched, heldout, variant, seed=9, batches=8)
    lt = heldout_control_loss(ctrl.build(), sched, heldout, variant, seed=9, batches=8)
    print(f"control {variant.value}: {dt:.0f}s train; heldout zero {lz:.4f} trained {lt:.4f} reduction {(1-lt/lz)*100:.1f}%", flush=True)

ecfg = ExperimentConfig(
    checkpoints={"L": f"{OUT}/L.ckpt", "T": f"{OUT}/T.ckpt"},
    corpus_seed=1000, corpus_size=64, image_size=32,
    palette_sizes=(4, 8, 16, 32), transfer_sizes=(8,),
    variants=("L", "T"), sampler_steps=27, batch_size=64, seed=0,
)
t0=time.time()
deq = eval_dequant(ecfg, variant="T")
print(f"eval_dequant: {time.time()-t0:.0f}s", flush=True)
for n in (4, 8, 16, 32):
    m = deq.value("T", n, "off", "ssim")
    i = deq.value("identity", n, "off", "ssim")
    print(f"  N={n}: model ssim {m:.4f} vs identity {i:.4f} | palette trend check")
t0=time.time()
tr = eval_palette_transfer(ecfg, TransferMode.COLOR)
print(f"eval_transfer: {time.time()-t0:.0f}s", flush=True)
for v in ("L", "T"):
    for tex in ("on", "off"):
        print(f"  {v} tex={tex}: palette_psnr {tr.value(v, 8, tex, 'palette_psnr'):.2f} palette_ssim {tr.value(v, 8, tex, 'palette_ssim'):.4f}")
t0=time.time()
inm = eval_inpaint(ecfg, "mean")
print(f"eval_inpaint_mean: {time.time()-t0:.0f}s", flush=True)
for v in ("L", "T"):
    for tex in ("on", "off"):
        print(f"  {v} tex={tex}: psnr {inm.value(v, 0, tex, 'psnr'):.2f} ssim {inm.value(v, 0, tex, 'ssim'):.4f}")
t0=time.time()
inr = eval_inpaint(ecfg, "random")
print(f"eval_inpaint_random: {time.time()-t0:.0f}s", flush=True)
for v in ("L", "T"):
    for tex in ("on", "off"):
        print(f"  {v} tex={tex}: palette_psnr {inr.value(v, 16, tex, 'palette_psnr'):.2f} palette_ssim {inr.value(v, 16, tex, 'palette_ssim'):.4f}")
print(f"TOTAL {time.time()-t_all:.0f}s")

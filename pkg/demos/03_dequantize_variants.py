"""Walkthrough: dequantization with every texture-conditioning variant.

Needs a control checkpoint from demos/02_train_dequantizer.py (or any
.ckpt trained elsewhere). Shows texture off/on and the luminance
post-process, and reports PSNR/SSIM against the ground truth plus the
palette-error proxy (what you'd use when no ground truth exists).
"""

import argparse
import os

import palettekit as pk
from palettekit.conditioning import Variant
from palettekit.data import toy_image
from palettekit.diffusion import SamplerConfig, dequantize, load_checkpoint

parser = argparse.ArgumentParser()
parser.add_argument("--checkpoint", default=os.path.join(os.path.dirname(__file__), "out", "T.ckpt"))
parser.add_argument("--colors", type=int, default=8)
parser.add_argument("--seed", type=int, default=11)
args = parser.parse_args()

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

ckpt = load_checkpoint(args.checkpoint)
den = ckpt.build()
variant = Variant.parse(ckpt.variant)
size = ckpt.config.image_size

gt = toy_image(seed=31337, index=4, size=size)
q = pk.median_cut(gt, args.colors)
pk.save_image(f"{OUT}/03_gt.png", gt)
pk.save_image(f"{OUT}/03_quantized.png", pk.render(q))
scfg = SamplerConfig(steps=27, seed=args.seed)

arms = {
    "texture_off": dict(texture_on=False),
    "texture_on": dict(texture_src=gt, texture_on=True),
    "l_post": dict(texture_src=gt, texture_on=True, l_post=True),
}
print(f"checkpoint variant {variant.value}, N={args.colors}")
for name, kw in arms.items():
    out = dequantize(ckpt, q, args.colors, variant, scfg=scfg, denoiser=den, **kw)
    pk.save_image(f"{OUT}/03_{name}.png", out)
    rep = pk.palette_error(out, q, args.colors)
    print(f"  {name:<12} PSNR {pk.psnr(out, gt):6.2f}  SSIM {pk.ssim(out, gt):.4f}"
          f"  palette-PSNR {rep.psnr:6.2f}  palette-SSIM {rep.ssim:.4f}")

# Different seeds give distinct plausible restorations of the same input.
for seed in (1, 2, 3):
    out = dequantize(ckpt, q, args.colors, variant,
                     scfg=SamplerConfig(steps=27, seed=seed), denoiser=den)
    pk.save_image(f"{OUT}/03_seed{seed}.png", out)
print(f"wrote results to {OUT}/")

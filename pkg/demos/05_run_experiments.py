"""Walkthrough: the evaluation harness at a small budget.

Runs the dequantization-quality and palette-transfer experiments on a
handful of held-out procedural images and prints the summary tables the
CSVs contain. Needs control checkpoints for variants L and T (train via
demos/02_train_dequantizer.py --variant L / --variant T).
"""

import argparse
import os

from palettekit.evalharness import (
    ExperimentConfig,
    eval_dequant,
    eval_palette_transfer,
    plot_summary,
)
from palettekit.transfer import TransferMode

parser = argparse.ArgumentParser()
parser.add_argument("--checkpoint-dir", default=os.path.join(os.path.dirname(__file__), "out"))
parser.add_argument("--corpus-size", type=int, default=32)
args = parser.parse_args()

OUT = os.path.join(os.path.dirname(__file__), "out", "experiments")
cfg = ExperimentConfig(
    checkpoints={
        "L": os.path.join(args.checkpoint_dir, "L.ckpt"),
        "T": os.path.join(args.checkpoint_dir, "T.ckpt"),
    },
    corpus_seed=1000,
    corpus_size=args.corpus_size,
    palette_sizes=(4, 8, 16, 32),
    transfer_sizes=(8,),
    variants=("L", "T"),
    out_dir=OUT,
)

print("dequantization quality (texture off) vs the identity baseline:")
deq = eval_dequant(cfg, variant="T")
for n in cfg.palette_sizes:
    print(f"  N={n:>3}: model SSIM {deq.value('T', n, 'off', 'ssim'):.4f}"
          f"  identity SSIM {deq.value('identity', n, 'off', 'ssim'):.4f}")
plot_summary(deq, os.path.join(OUT, "dequant_plot.png"))

print("palette transfer (color mode), palette error at N=8:")
tr = eval_palette_transfer(cfg, TransferMode.COLOR)
for variant in cfg.variants:
    for tex in ("on", "off"):
        print(f"  {variant:<2} texture {tex:<3}: "
              f"palette-PSNR {tr.value(variant, 8, tex, 'palette_psnr'):6.2f}  "
              f"palette-SSIM {tr.value(variant, 8, tex, 'palette_ssim'):.4f}")
print(f"CSV tables, manifests, and contact sheets in {OUT}/")

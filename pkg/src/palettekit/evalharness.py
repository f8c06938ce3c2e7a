"""Scripted desk-scale experiments: dequantization quality, texture
variants, palette transfer, inpainting, and augmentation robustness.

Every experiment is a pure function of (config, checkpoints): per-image
sampling seeds derive from the experiment seed and image index, images
are processed in index order in fixed-size batches, and CSV floats use
repr formatting, so reruns produce byte-identical outputs.
"""

from __future__ import annotations

import json
import math
import os
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .conditioning import Variant, build_dequant_stack, build_inpaint_stack, random_mask
from .data import ImageFolderDataset, ProceduralDataset
from .diffusion import SamplerConfig, load_checkpoint, sample_batch
from .errors import CheckpointError
from .image import AugmentationConfig, augment_hsv, luminance, replace_luminance, save_image
from .metrics import aggregate, palette_error, psnr, ssim
from .quantize import IndexedImage, median_cut, render
from .transfer import TransferMode, transfer_palette

L_POST = "L-post"  # pseudo-variant: L checkpoint + luminance post-process


@dataclass(frozen=True)
class ExperimentConfig:
    checkpoints: dict = field(default_factory=dict)  # variant value -> path
    corpus_seed: int = 1000
    corpus_path: str | None = None
    corpus_size: int = 512
    image_size: int = 32
    palette_sizes: tuple = (4, 8, 16, 32)
    transfer_sizes: tuple = (8, 32)
    variants: tuple = ("L", "T")
    sampler_steps: int = 27
    thresholding_p: float = 0.95
    thresholding_c: float = 1.0
    seed: int = 0
    batch_size: int = 64
    sheet_images: int = 8
    out_dir: str | None = None

    def corpus(self):
        if self.corpus_path:
            ds = ImageFolderDataset(self.corpus_path, size=self.image_size, seed=self.corpus_seed)
            n = min(self.corpus_size, len(ds))
        else:
            ds = ProceduralDataset(self.corpus_seed, self.corpus_size, self.image_size)
            n = self.corpus_size
        return [ds[i] for i in range(n)]

    def sampler(self, seed: int = 0) -> SamplerConfig:
        return SamplerConfig(
            steps=self.sampler_steps,
            thresholding_p=self.thresholding_p,
            thresholding_c=self.thresholding_c,
            seed=seed,
        )


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    variant: str
    palette_size: int
    texture: str  # "on" / "off" / "-"
    metric: str
    mean: float
    standard_error: float
    n: int


@dataclass
class Results:
    experiment: str
    per_image: list  # (variant, palette_size, texture, metric, image_index, value)
    summary: list[ResultRow]
    sheets: dict = field(default_factory=dict)  # name -> uint8 image
    manifest: dict = field(default_factory=dict)

    def value(self, variant, palette_size, texture, metric) -> float:
        for row in self.summary:
            if (row.variant, row.palette_size, row.texture, row.metric) == (
                variant, palette_size, texture, metric,
            ):
                return row.mean
        raise KeyError((variant, palette_size, texture, metric))

    def write(self, out_dir) -> None:
        os.makedirs(out_dir, exist_ok=True)
        per_image_path = os.path.join(out_dir, f"{self.experiment}_per_image.csv")
        with open(per_image_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("experiment,variant,palette_size,texture,metric,image_index,value\n")
            for variant, n, tex, metric, idx, value in self.per_image:
                fh.write(
                    f"{self.experiment},{variant},{n},{tex},{metric},{idx},{_fmt(value)}\n"
                )
        summary_path = os.path.join(out_dir, f"{self.experiment}_summary.csv")
        with open(summary_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("experiment,variant,palette_size,texture,metric,mean,standard_error,n\n")
            for r in self.summary:
                fh.write(
                    f"{r.experiment},{r.variant},{r.palette_size},{r.texture},"
                    f"{r.metric},{_fmt(r.mean)},{_fmt(r.standard_error)},{r.n}\n"
                )
        with open(os.path.join(out_dir, f"{self.experiment}_manifest.json"), "w") as fh:
            json.dump(self.manifest, fh, sort_keys=True, indent=2)
            fh.write("\n")
        for name, sheet in self.sheets.items():
            save_image(os.path.join(out_dir, f"{self.experiment}_{name}.png"), sheet)


def _fmt(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if math.isnan(v):
        return "nan"
    return repr(float(v))


def derive_seed(*parts) -> int:
    """Stable sampling seed from experiment seed + arm labels + indices."""
    ints = [zlib.crc32(p.encode()) if isinstance(p, str) else int(p) for p in parts]
    return int(np.random.SeedSequence(ints).generate_state(1, np.uint64)[0])


def _load_checkpoints(cfg: ExperimentConfig, variants) -> dict:
    out = {}
    for v in variants:
        key = "L" if v == L_POST else v
        if key not in cfg.checkpoints:
            raise CheckpointError(f"no checkpoint configured for variant {key!r}")
        if key not in out:
            out[key] = load_checkpoint(cfg.checkpoints[key])
    return out


def _sample_all(denoiser, sched, cfg: ExperimentConfig, stacks, seeds) -> np.ndarray:
    outs = []
    for lo in range(0, len(stacks), cfg.batch_size):
        chunk = np.asarray(stacks[lo : lo + cfg.batch_size])
        outs.append(
            sample_batch(denoiser, chunk, sched, cfg.sampler(), seeds[lo : lo + cfg.batch_size])
        )
    return np.concatenate(outs) if outs else np.empty((0,))


def _summarize(experiment, per_image) -> list[ResultRow]:
    groups: dict = {}
    for variant, n, tex, metric, idx, value in per_image:
        groups.setdefault((variant, n, tex, metric), []).append(value)
    rows = []
    for (variant, n, tex, metric), values in groups.items():
        agg = aggregate(values)
        rows.append(ResultRow(experiment, variant, n, tex, metric,
                              agg.mean, agg.standard_error, agg.n))
    return rows


def _manifest(cfg: ExperimentConfig, variants) -> dict:
    import hashlib

    hashes = {}
    for v in variants:
        key = "L" if v == L_POST else v
        path = cfg.checkpoints.get(key)
        if path and os.path.exists(path):
            hashes[key] = hashlib.sha256(open(path, "rb").read()).hexdigest()
    return {
        "version": __version__,
        "config": {
            "corpus_seed": cfg.corpus_seed,
            "corpus_path": cfg.corpus_path,
            "corpus_size": cfg.corpus_size,
            "image_size": cfg.image_size,
            "palette_sizes": list(cfg.palette_sizes),
            "transfer_sizes": list(cfg.transfer_sizes),
            "variants": list(cfg.variants),
            "sampler_steps": cfg.sampler_steps,
            "thresholding_p": cfg.thresholding_p,
            "thresholding_c": cfg.thresholding_c,
            "seed": cfg.seed,
            "batch_size": cfg.batch_size,
        },
        "checkpoint_hashes": hashes,
    }


def _grid(columns: list[list[np.ndarray]], pad: int = 2) -> np.ndarray:
    """Contact sheet: each column is a list of equal-size images."""
    rows = len(columns[0])
    h, w = columns[0][0].shape[:2]
    sheet = np.full(
        (rows * (h + pad) + pad, len(columns) * (w + pad) + pad, 3), 255, np.uint8
    )
    for c, col in enumerate(columns):
        for r, img in enumerate(col):
            y = pad + r * (h + pad)
            x = pad + c * (w + pad)
            sheet[y : y + h, x : x + w] = img
    return sheet


def eval_dequant(cfg: ExperimentConfig, variant: str = "T") -> Results:
    """Quantize -> dequantize (texture off) -> PSNR/SSIM vs ground truth.

    Also emits identity-baseline rows (output = quantized input).
    """
    ckpts = _load_checkpoints(cfg, (variant,))
    ckpt = ckpts[variant]
    den = ckpt.build()
    imgs = cfg.corpus()
    per_image = []
    sheet_cols = None
    for n in cfg.palette_sizes:
        qs = [median_cut(img, n) for img in imgs]
        stacks = [build_dequant_stack(q, n, Variant.parse(variant)) for q in qs]
        seeds = [derive_seed(cfg.seed, "dequant", variant, n, 0, i) for i in range(len(imgs))]
        gens = _sample_all(den, ckpt.schedule, cfg, stacks, seeds)
        for i, (img, q, gen) in enumerate(zip(imgs, qs, gens)):
            per_image.append((variant, n, "off", "psnr", i, psnr(gen, img)))
            per_image.append((variant, n, "off", "ssim", i, ssim(gen, img)))
            rq = render(q)
            per_image.append(("identity", n, "off", "psnr", i, psnr(rq, img)))
            per_image.append(("identity", n, "off", "ssim", i, ssim(rq, img)))
        if n == cfg.palette_sizes[0]:
            k = min(cfg.sheet_images, len(imgs))
            sheet_cols = [
                [imgs[i] for i in range(k)],
                [render(qs[i]) for i in range(k)],
                [gens[i] for i in range(k)],
            ]
    results = Results("dequant", per_image, _summarize("dequant", per_image))
    if sheet_cols:
        results.sheets["sheet"] = _grid(sheet_cols)
    results.manifest = _manifest(cfg, (variant,))
    if cfg.out_dir:
        results.write(cfg.out_dir)
    return results


def eval_texture_variants(cfg: ExperimentConfig) -> Results:
    """Texture-conditioned dequantization: GT metrics and palette error
    for every configured variant (plus the luminance post-process), with
    texture-on and texture-off arms."""
    variants = tuple(cfg.variants) + (L_POST,) if L_POST not in cfg.variants else cfg.variants
    ckpts = _load_checkpoints(cfg, variants)
    imgs = cfg.corpus()
    per_image = []
    off_stack_hashes: dict = {}
    for variant in variants:
        key = "L" if variant == L_POST else variant
        ckpt = ckpts[key]
        den = ckpt.build()
        for n in cfg.palette_sizes:
            qs = [median_cut(img, n) for img in imgs]
            for tex in ("on", "off"):
                vkind = Variant.parse(key) if tex == "on" else Variant.NOTEX
                stacks = [
                    build_dequant_stack(q, n, vkind, texture_src=img, texture_on=tex == "on")
                    for q, img in zip(qs, imgs)
                ]
                if tex == "off" and key in ("L", "G", "T"):
                    # conditioning is variant-independent without texture
                    digest = hash(np.asarray(stacks).tobytes())
                    off_stack_hashes.setdefault(n, digest)
                    assert off_stack_hashes[n] == digest
                seeds = [
                    derive_seed(cfg.seed, "dequant", key, n, 1 if tex == "on" else 0, i)
                    for i in range(len(imgs))
                ]
                gens = _sample_all(den, ckpt.schedule, cfg, stacks, seeds)
                if variant == L_POST:
                    gens = np.stack([
                        replace_luminance(g, luminance(img)) for g, img in zip(gens, imgs)
                    ])
                for i, (img, q, gen) in enumerate(zip(imgs, qs, gens)):
                    per_image.append((variant, n, tex, "psnr", i, psnr(gen, img)))
                    per_image.append((variant, n, tex, "ssim", i, ssim(gen, img)))
                    rep = palette_error(gen, q, n, mode="fresh")
                    per_image.append((variant, n, tex, "palette_psnr", i, rep.psnr))
                    per_image.append((variant, n, tex, "palette_ssim", i, rep.ssim))
    results = Results("texture_variants", per_image, _summarize("texture_variants", per_image))
    results.manifest = _manifest(cfg, variants)
    if cfg.out_dir:
        results.write(cfg.out_dir)
    return results


def eval_palette_transfer(cfg: ExperimentConfig, mode: TransferMode) -> Results:
    """Transfer each image's palette from a random donor, dequantize with
    and without texture, and score palette error against the transferred
    quantized conditioning."""
    ckpts = _load_checkpoints(cfg, cfg.variants)
    imgs = cfg.corpus()
    donor_rng = np.random.default_rng(derive_seed(cfg.seed, "transfer-donors", mode.value))
    donors = []
    for i in range(len(imgs)):
        j = int(donor_rng.integers(0, len(imgs) - 1))
        donors.append(j + 1 if j >= i else j)
    per_image = []
    sheets = {}
    exp_name = f"transfer_{mode.value}"
    for n in cfg.transfer_sizes:
        qs = [median_cut(img, n) for img in imgs]
        transferred = [
            transfer_palette(qs[i], median_cut(imgs[donors[i]], n).palette, mode)
            for i in range(len(imgs))
        ]
        for variant in cfg.variants:
            ckpt = ckpts[variant]
            den = ckpt.build()
            for tex in ("on", "off"):
                vkind = Variant.parse(variant) if tex == "on" else Variant.NOTEX
                stacks = [
                    build_dequant_stack(tq, n, vkind, texture_src=img, texture_on=tex == "on")
                    for tq, img in zip(transferred, imgs)
                ]
                seeds = [
                    derive_seed(cfg.seed, exp_name, variant, n, 1 if tex == "on" else 0, i)
                    for i in range(len(imgs))
                ]
                gens = _sample_all(den, ckpt.schedule, cfg, stacks, seeds)
                for i, (tq, gen) in enumerate(zip(transferred, gens)):
                    rep = palette_error(gen, tq, n, mode="fresh")
                    per_image.append((variant, n, tex, "palette_psnr", i, rep.psnr))
                    per_image.append((variant, n, tex, "palette_ssim", i, rep.ssim))
                if n == cfg.transfer_sizes[0] and tex == "on" and variant == cfg.variants[-1]:
                    k = min(cfg.sheet_images, len(imgs))
                    sheets["sheet"] = _grid([
                        [imgs[i] for i in range(k)],
                        [imgs[donors[i]] for i in range(k)],
                        [render(transferred[i]) for i in range(k)],
                        [gens[i] for i in range(k)],
                    ])
    results = Results(exp_name, per_image, _summarize(exp_name, per_image))
    results.sheets = sheets
    results.manifest = _manifest(cfg, cfg.variants)
    if cfg.out_dir:
        results.write(cfg.out_dir)
    return results


def eval_inpaint(cfg: ExperimentConfig, fill_mode: str = "mean") -> Results:
    """Random-rectangle inpainting: mean fill scores PSNR/SSIM vs ground
    truth; random fill scores palette error at 16 colors."""
    if fill_mode not in ("mean", "random"):
        raise ValueError(f"fill_mode must be 'mean' or 'random', got {fill_mode!r}")
    ckpts = _load_checkpoints(cfg, cfg.variants)
    imgs = cfg.corpus()
    masks = [
        random_mask(img.shape[0], img.shape[1], derive_seed(cfg.seed, "inpaint-mask", i))
        for i, img in enumerate(imgs)
    ]
    fill_rng = np.random.default_rng(derive_seed(cfg.seed, "inpaint-fill", fill_mode))
    fills = [
        "mean" if fill_mode == "mean" else tuple(int(v) for v in fill_rng.integers(0, 256, 3))
        for _ in imgs
    ]
    per_image = []
    exp_name = f"inpaint_{fill_mode}"
    coverage = [
        float(m.to_plane(img.shape[0], img.shape[1]).mean()) for m, img in zip(masks, imgs)
    ]
    for i, c in enumerate(coverage):
        per_image.append(("-", 0, "-", "mask_coverage", i, c))
    for variant in cfg.variants:
        ckpt = ckpts[variant]
        den = ckpt.build()
        for tex in ("on", "off"):
            vkind = Variant.parse(variant) if tex == "on" else Variant.NOTEX
            stacks = [
                build_inpaint_stack(img, m, f, vkind, texture_in_mask=True)
                for img, m, f in zip(imgs, masks, fills)
            ]
            seeds = [
                derive_seed(cfg.seed, exp_name, variant, 0, 1 if tex == "on" else 0, i)
                for i in range(len(imgs))
            ]
            gens = _sample_all(den, ckpt.schedule, cfg, stacks, seeds)
            for i, (img, gen) in enumerate(zip(imgs, gens)):
                if fill_mode == "mean":
                    per_image.append((variant, 0, tex, "psnr", i, psnr(gen, img)))
                    per_image.append((variant, 0, tex, "ssim", i, ssim(gen, img)))
                else:
                    patched = img.copy()
                    inside = masks[i].to_plane(img.shape[0], img.shape[1]) > 0
                    patched[inside] = fills[i]
                    q_in = median_cut(patched, 16)
                    rep = palette_error(gen, q_in, 16, mode="fresh")
                    per_image.append((variant, 16, tex, "palette_psnr", i, rep.psnr))
                    per_image.append((variant, 16, tex, "palette_ssim", i, rep.ssim))
    results = Results(exp_name, per_image, _summarize(exp_name, per_image))
    results.manifest = _manifest(cfg, cfg.variants)
    if cfg.out_dir:
        results.write(cfg.out_dir)
    return results


def eval_augmentation(cfg: ExperimentConfig, strengths=(0.0, 0.25, 0.5, 0.75, 1.0)) -> Results:
    """Robustness sweep: augment image and quantized image with the same
    HSV triple, dequantize with and without thresholded-gradient texture,
    and score SSIM against the augmented ground truth."""
    ckpts = _load_checkpoints(cfg, ("T",))
    ckpt = ckpts["T"]
    den = ckpt.build()
    imgs = cfg.corpus()
    per_image = []
    for s in strengths:
        acfgs = [
            AugmentationConfig(strength=s, seed=derive_seed(cfg.seed, "aug-triple", i))
            for i in range(len(imgs))
        ]
        aug_imgs = [augment_hsv(img, ac) for img, ac in zip(imgs, acfgs)]
        for n in cfg.palette_sizes:
            aq = [
                median_cut(augment_hsv(render(median_cut(img, n)), ac), n)
                for img, ac in zip(imgs, acfgs)
            ]
            for tex in ("on", "off"):
                stacks = [
                    build_dequant_stack(
                        q, n, Variant.T if tex == "on" else Variant.NOTEX,
                        texture_src=ai, texture_on=tex == "on",
                    )
                    for q, ai in zip(aq, aug_imgs)
                ]
                seeds = [
                    derive_seed(cfg.seed, "dequant", "T", n, 1 if tex == "on" else 0, i)
                    for i in range(len(imgs))
                ]
                gens = _sample_all(den, ckpt.schedule, cfg, stacks, seeds)
                for i, (ai, gen) in enumerate(zip(aug_imgs, gens)):
                    per_image.append(
                        (f"T:{s}", n, tex, "ssim", i, ssim(gen, ai))
                    )
    results = Results("augmentation", per_image, _summarize("augmentation", per_image))
    results.manifest = _manifest(cfg, ("T",))
    results.manifest["strengths"] = list(strengths)
    if cfg.out_dir:
        results.write(cfg.out_dir)
    return results


def plot_summary(results: Results, path) -> None:
    """Line plot of summary means with standard-error shading."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    series: dict = {}
    for r in results.summary:
        series.setdefault((r.variant, r.texture, r.metric), []).append(
            (r.palette_size, r.mean, r.standard_error)
        )
    fig, ax = plt.subplots(figsize=(7, 5))
    for (variant, tex, metric), pts in sorted(series.items()):
        pts.sort()
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        es = [p[2] for p in pts]
        if len(xs) < 2 or any(math.isinf(y) or math.isnan(y) for y in ys):
            continue
        label = f"{variant} tex={tex} {metric}"
        ax.plot(xs, ys, marker="o", label=label)
        ax.fill_between(xs, [y - e for y, e in zip(ys, es)],
                        [y + e for y, e in zip(ys, es)], alpha=0.2)
    ax.set_xlabel("palette size")
    ax.set_ylabel("metric")
    ax.set_title(results.experiment)
    ax.legend(fontsize=7)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)

"""Command-line front door for every pipeline stage.

Exit codes: 0 success, 1 usage error (no partial outputs), 2 runtime
failure. Train/eval read TOML-like ``key = value`` config files; any
``--set key=value`` flag overrides a file value.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .conditioning import MaskSpec, Variant, build_inpaint_stack
from .data import ImageFolderDataset, ProceduralDataset
from .errors import PaletteKitError
from .image import load_image, save_image
from .quantize import median_cut, render
from .transfer import TransferMode, load_colormap, resample_colormap, transfer_palette

CHECKPOINT_DIR_ENV = "PALETTEKIT_CHECKPOINT_DIR"
POWER_OF_TWO_MESSAGE = "colors must be a power of two in [4,128]"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as exit code 1, not 2."""

    def error(self, message):
        raise UsageError(message)


def _parse_colors(value: str) -> int:
    try:
        n = int(value)
    except ValueError:
        raise UsageError(POWER_OF_TWO_MESSAGE)
    if not (4 <= n <= 128 and (n & (n - 1)) == 0):
        raise UsageError(POWER_OF_TWO_MESSAGE)
    return n


def _parse_rect(value: str):
    parts = value.split(",")
    if len(parts) != 4:
        raise UsageError(f"--mask-rect expects t,l,h,w, got {value!r}")
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise UsageError(f"--mask-rect expects integers, got {value!r}")


def _parse_color(value: str):
    if value == "mean":
        return "mean"
    parts = value.split(",")
    if len(parts) != 3:
        raise UsageError(f"--color expects R,G,B or 'mean', got {value!r}")
    try:
        rgb = tuple(int(p) for p in parts)
    except ValueError:
        raise UsageError(f"--color expects integers, got {value!r}")
    if any(not 0 <= c <= 255 for c in rgb):
        raise UsageError("--color channels must be in [0, 255]")
    return rgb


def read_config(path) -> dict:
    """Parse a TOML-like key = value file; '#' starts a comment."""
    values: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, _, val = line.partition("=")
            values[key.strip()] = val.strip().strip("\"'")
    return values


def _apply_overrides(values: dict, sets) -> dict:
    for item in sets or []:
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        key, _, val = item.partition("=")
        values[key.strip()] = val.strip()
    return values


def _as_int(values, key, default):
    return int(values[key]) if key in values else default


def _as_float(values, key, default):
    return float(values[key]) if key in values else default


def _as_int_tuple(values, key, default):
    if key not in values:
        return default
    return tuple(int(p) for p in str(values[key]).split(",") if p.strip())


def build_parser() -> _Parser:
    p = _Parser(prog="palettekit", description=__doc__)
    p.add_argument("--version", action="version", version=f"palettekit {__version__}")
    sub = p.add_subparsers(dest="command", metavar="command")

    q = sub.add_parser("quantize", parents=[], help="median-cut quantize a PNG",
                       add_help=True)
    q.add_argument("--input", required=True, help="input PNG path")
    q.add_argument("--colors", required=True, help="palette size (power of two in [4,128])")
    q.add_argument("--out-image", required=True, help="quantized PNG output")
    q.add_argument("--out-palette", required=True, help="palette JSON output")

    d = sub.add_parser("dequantize", help="restore a natural image from a quantized PNG")
    d.add_argument("--input", required=True, help="quantized input PNG")
    d.add_argument("--colors", required=True, help="palette size used for the input")
    d.add_argument("--checkpoint", required=True, help="control checkpoint file")
    d.add_argument("--variant", default="T", choices=[v.value for v in Variant])
    d.add_argument("--texture", default="off", choices=["off", "on"])
    d.add_argument("--texture-src", help="texture source PNG (required with --texture on)")
    d.add_argument("--l-post", action="store_true",
                   help="replace output luminance with the texture source's")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--steps", type=int, default=27)
    d.add_argument("--out", required=True, help="output PNG")

    t = sub.add_parser("transfer", help="remap a palette from a donor image or colormap")
    t.add_argument("--input", required=True)
    t.add_argument("--donor", help="donor image PNG (palette source)")
    t.add_argument("--colormap", help="colormap JSON (palette source)")
    t.add_argument("--colors", required=True)
    t.add_argument("--mode", default="color", choices=[m.value for m in TransferMode])
    t.add_argument("--checkpoint", help="dequantize the transferred image with this checkpoint")
    t.add_argument("--variant", default="T", choices=[v.value for v in Variant])
    t.add_argument("--texture", default="off", choices=["off", "on"])
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--steps", type=int, default=27)
    t.add_argument("--out", required=True, help="output PNG")
    t.add_argument("--out-palette", help="transferred palette JSON output")

    i = sub.add_parser("inpaint", help="recolor masked patches with diffusion inpainting")
    i.add_argument("--input", required=True)
    i.add_argument("--mask-rect", action="append", required=True, metavar="T,L,H,W",
                   help="rectangle top,left,height,width (repeatable)")
    i.add_argument("--color", default="mean", help="fill color R,G,B or 'mean'")
    i.add_argument("--texture-in-mask", action="store_true",
                   help="keep texture conditioning inside the mask")
    i.add_argument("--checkpoint", required=True)
    i.add_argument("--variant", default="T", choices=[v.value for v in Variant])
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("--steps", type=int, default=27)
    i.add_argument("--out", required=True)

    tb = sub.add_parser("train-base", help="pretrain the unconditional base model")
    tb.add_argument("--config", help="key = value config file")
    tb.add_argument("--set", action="append", metavar="KEY=VALUE",
                    help="override a config value (repeatable)")
    tb.add_argument("--out-checkpoint", required=True)

    tc = sub.add_parser("train-control", help="train a control encoder on a frozen base")
    tc.add_argument("--config", help="key = value config file")
    tc.add_argument("--set", action="append", metavar="KEY=VALUE")
    tc.add_argument("--base-checkpoint", help="base checkpoint (or config key base_checkpoint)")
    tc.add_argument("--out-checkpoint", required=True)

    e = sub.add_parser("eval", help="run a scripted experiment")
    e.add_argument("--experiment", required=True,
                   choices=["dequant", "texture-variants", "transfer-color",
                            "transfer-negative-color", "inpaint-mean", "inpaint-random",
                            "augmentation"])
    e.add_argument("--config", help="key = value config file")
    e.add_argument("--set", action="append", metavar="KEY=VALUE")
    e.add_argument("--out-dir", required=True)
    e.add_argument("--plot", action="store_true", help="also write a summary plot PNG")

    s = sub.add_parser("serve", help="serve the HTTP API for the browser UI")
    s.add_argument("--addr", default="127.0.0.1:8765")
    s.add_argument("--checkpoint-dir",
                   default=os.environ.get(CHECKPOINT_DIR_ENV),
                   help=f"directory of .ckpt files (default ${CHECKPOINT_DIR_ENV})")
    return p


def _load_corpus(values: dict):
    size = _as_int(values, "image_size", 32)
    if values.get("corpus_path"):
        return ImageFolderDataset(values["corpus_path"], size=size,
                                  seed=_as_int(values, "corpus_seed", 0))
    return ProceduralDataset(_as_int(values, "corpus_seed", 7),
                             _as_int(values, "corpus_size", 4096), size)


def _model_config(values: dict):
    from .diffusion import ModelConfig

    return ModelConfig(
        image_size=_as_int(values, "image_size", 32),
        base_channels=_as_int(values, "base_channels", 32),
        channel_multipliers=_as_int_tuple(values, "channel_multipliers", (1, 2, 2)),
        time_embed_dim=_as_int(values, "time_embed_dim", 128),
        groups=_as_int(values, "groups", 8),
    )


def _train_config(values: dict):
    from .diffusion import TrainConfig

    return TrainConfig(
        batch_size=_as_int(values, "batch_size", 16),
        learning_rate=_as_float(values, "learning_rate", 1e-4),
        weight_decay=_as_float(values, "weight_decay", 0.0),
    )


def _write_loss_csv(path, curve) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("step,loss\n")
        for step, loss in curve:
            fh.write(f"{step},{loss!r}\n")


def cmd_quantize(args) -> int:
    n = _parse_colors(args.colors)
    img = load_image(args.input)
    q = median_cut(img, n)
    save_image(args.out_image, render(q))
    with open(args.out_palette, "w", encoding="utf-8") as fh:
        fh.write(q.palette.to_json())
        fh.write("\n")
    return 0


def _load_denoiser(path):
    from .diffusion import load_checkpoint

    ckpt = load_checkpoint(path)
    return ckpt, ckpt.build()


def cmd_dequantize(args) -> int:
    from .diffusion import SamplerConfig, dequantize

    n = _parse_colors(args.colors)
    variant = Variant.parse(args.variant)
    texture_on = args.texture == "on"
    if (texture_on or args.l_post) and not args.texture_src:
        raise UsageError("--texture on and --l-post require --texture-src")
    img = load_image(args.input)
    texture_src = load_image(args.texture_src) if args.texture_src else None
    ckpt, den = _load_denoiser(args.checkpoint)
    out = dequantize(
        ckpt, median_cut(img, n), n, variant,
        texture_src=texture_src, texture_on=texture_on,
        scfg=SamplerConfig(steps=args.steps, seed=args.seed),
        l_post=args.l_post, denoiser=den,
    )
    save_image(args.out, out)
    return 0


def cmd_transfer(args) -> int:
    n = _parse_colors(args.colors)
    if bool(args.donor) == bool(args.colormap):
        raise UsageError("provide exactly one of --donor or --colormap")
    img = load_image(args.input)
    q = median_cut(img, n)
    if args.donor:
        donor = load_image(args.donor)
        tgt = median_cut(donor, n).palette
        # images with few distinct colors quantize below n; shrink both
        # palettes to a common size
        while len(tgt) != len(q.palette):
            m = min(len(tgt), len(q.palette))
            q = median_cut(img, m)
            tgt = median_cut(donor, m).palette
    else:
        tgt = resample_colormap(load_colormap(args.colormap), len(q.palette))
    transferred = transfer_palette(q, tgt, TransferMode.parse(args.mode))
    if args.out_palette:
        with open(args.out_palette, "w", encoding="utf-8") as fh:
            fh.write(transferred.palette.to_json())
            fh.write("\n")
    if args.checkpoint:
        from .diffusion import SamplerConfig, dequantize

        ckpt, den = _load_denoiser(args.checkpoint)
        out = dequantize(
            ckpt, transferred, len(transferred.palette), Variant.parse(args.variant),
            texture_src=img, texture_on=args.texture == "on",
            scfg=SamplerConfig(steps=args.steps, seed=args.seed), denoiser=den,
        )
    else:
        out = render(transferred)
    save_image(args.out, out)
    return 0


def cmd_inpaint(args) -> int:
    from .diffusion import SamplerConfig, sample

    img = load_image(args.input)
    mask = MaskSpec(tuple(_parse_rect(r) for r in args.mask_rect))
    fill = _parse_color(args.color)
    ckpt, den = _load_denoiser(args.checkpoint)
    stack = build_inpaint_stack(img, mask, fill, Variant.parse(args.variant),
                                texture_in_mask=args.texture_in_mask)
    out = sample(den, stack, ckpt.schedule, SamplerConfig(steps=args.steps, seed=args.seed))
    save_image(args.out, out)
    return 0


def cmd_train_base(args) -> int:
    from .diffusion import make_schedule, save_checkpoint, train_base

    values = _apply_overrides(read_config(args.config) if args.config else {}, args.set)
    sched = make_schedule(_as_int(values, "schedule_T", 1000),
                          values.get("schedule_kind", "linear"))
    ckpt = train_base(
        _load_corpus(values), _model_config(values), sched,
        steps=_as_int(values, "steps", 2000), seed=_as_int(values, "seed", 0),
        train_cfg=_train_config(values),
    )
    save_checkpoint(args.out_checkpoint, ckpt)
    _write_loss_csv(str(args.out_checkpoint) + ".loss.csv", ckpt.metadata["loss_curve"])
    return 0


def cmd_train_control(args) -> int:
    from .diffusion import load_checkpoint, save_checkpoint, train_control

    values = _apply_overrides(read_config(args.config) if args.config else {}, args.set)
    base_path = args.base_checkpoint or values.get("base_checkpoint")
    if not base_path:
        raise UsageError("train-control needs --base-checkpoint or config base_checkpoint")
    dequant_frac = _as_float(values, "task_dequant", 0.5)
    ckpt = train_control(
        _load_corpus(values), load_checkpoint(base_path),
        Variant.parse(values.get("variant", "T")),
        task_mix=(dequant_frac, 1.0 - dequant_frac),
        steps=_as_int(values, "steps", 1000), seed=_as_int(values, "seed", 0),
        train_cfg=_train_config(values),
        palette_sizes=_as_int_tuple(values, "palette_sizes", (4, 8, 16, 32)),
    )
    save_checkpoint(args.out_checkpoint, ckpt)
    _write_loss_csv(str(args.out_checkpoint) + ".loss.csv", ckpt.metadata["loss_curve"])
    return 0


def _experiment_config(values: dict, out_dir) -> "ExperimentConfig":
    from .evalharness import ExperimentConfig

    checkpoints = {}
    if values.get("checkpoint_dir"):
        checkpoints.update(_scan_checkpoints(values["checkpoint_dir"]))
    for key, val in values.items():
        if key.startswith("checkpoint_") and key != "checkpoint_dir":
            checkpoints[key[len("checkpoint_"):]] = val
    return ExperimentConfig(
        checkpoints=checkpoints,
        corpus_seed=_as_int(values, "corpus_seed", 1000),
        corpus_path=values.get("corpus_path"),
        corpus_size=_as_int(values, "corpus_size", 512),
        image_size=_as_int(values, "image_size", 32),
        palette_sizes=_as_int_tuple(values, "palette_sizes", (4, 8, 16, 32)),
        transfer_sizes=_as_int_tuple(values, "transfer_sizes", (8, 32)),
        variants=tuple(str(values.get("variants", "L,T")).split(",")),
        sampler_steps=_as_int(values, "sampler_steps", 27),
        thresholding_p=_as_float(values, "thresholding_p", 0.95),
        thresholding_c=_as_float(values, "thresholding_c", 1.0),
        seed=_as_int(values, "seed", 0),
        batch_size=_as_int(values, "batch_size", 64),
        sheet_images=_as_int(values, "sheet_images", 8),
        out_dir=str(out_dir),
    )


def _scan_checkpoints(directory) -> dict:
    from .diffusion import load_checkpoint

    found = {}
    for name in sorted(os.listdir(directory)):
        if not name.endswith(".ckpt"):
            continue
        path = os.path.join(directory, name)
        try:
            ckpt = load_checkpoint(path)
        except PaletteKitError:
            continue
        key = ckpt.variant if ckpt.variant else "base"
        found.setdefault(key, path)
    return found


def cmd_eval(args) -> int:
    from . import evalharness as ev
    from .transfer import TransferMode

    values = _apply_overrides(read_config(args.config) if args.config else {}, args.set)
    cfg = _experiment_config(values, args.out_dir)
    if args.experiment == "dequant":
        results = ev.eval_dequant(cfg, variant=values.get("dequant_variant", "T"))
    elif args.experiment == "texture-variants":
        results = ev.eval_texture_variants(cfg)
    elif args.experiment == "transfer-color":
        results = ev.eval_palette_transfer(cfg, TransferMode.COLOR)
    elif args.experiment == "transfer-negative-color":
        results = ev.eval_palette_transfer(cfg, TransferMode.NEGATIVE_COLOR)
    elif args.experiment == "inpaint-mean":
        results = ev.eval_inpaint(cfg, "mean")
    elif args.experiment == "inpaint-random":
        results = ev.eval_inpaint(cfg, "random")
    else:
        strengths = tuple(
            float(s) for s in str(values.get("strengths", "0.0,0.25,0.5,0.75,1.0")).split(",")
        )
        results = ev.eval_augmentation(cfg, strengths)
    if args.plot:
        ev.plot_summary(results, os.path.join(args.out_dir, f"{results.experiment}_plot.png"))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    if not args.checkpoint_dir:
        raise UsageError(f"--checkpoint-dir or ${CHECKPOINT_DIR_ENV} is required")
    host, _, port = args.addr.rpartition(":")
    if not host or not port.isdigit():
        raise UsageError(f"--addr expects host:port, got {args.addr!r}")
    app = create_app(args.checkpoint_dir)
    uvicorn.run(app, host=host, port=int(port), log_level="warning")
    return 0


COMMANDS = {
    "quantize": cmd_quantize,
    "dequantize": cmd_dequantize,
    "transfer": cmd_transfer,
    "inpaint": cmd_inpaint,
    "train-base": cmd_train_base,
    "train-control": cmd_train_control,
    "eval": cmd_eval,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError("a subcommand is required (see --help)")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help/--version paths
        return 0 if exc.code in (0, None) else int(exc.code)
    except PaletteKitError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

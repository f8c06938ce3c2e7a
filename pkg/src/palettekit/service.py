"""Local HTTP API for the browser UI.

JSON bodies with base64 PNG images; stateless apart from the immutable
checkpoint registry loaded at startup. Every response echoes the
request's ``id`` so clients can correlate replies.
"""

from __future__ import annotations

import base64
import binascii
import os

import numpy as np
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .conditioning import MaskSpec, Variant, build_inpaint_stack
from .errors import DecodeError, OutOfBoundsError, PaletteKitError, SizeMismatchError
from .image import decode_png, encode_png
from .quantize import Palette, median_cut, project_to_palette, render
from .transfer import TransferMode, transfer_palette

MAX_SIDE = 256  # request size cap; larger images get 413


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status, self.code, self.message = status, code, message


class QuantizeRequest(BaseModel):
    id: str | None = None
    image: str
    colors: int = Field(ge=2, le=256)


class TransferRequest(BaseModel):
    id: str | None = None
    quantized_image: str
    palette: list[list[int]]
    target_palette: list[list[int]]
    mode: str = "color"


class DequantizeRequest(BaseModel):
    id: str | None = None
    quantized_image: str
    colors: int = Field(ge=2, le=256)
    variant: str = "T"
    texture_on: bool = False
    texture_image: str | None = None
    l_post: bool = False
    seed: int = 0
    steps: int = Field(default=27, ge=1)


class InpaintRequest(BaseModel):
    id: str | None = None
    image: str
    mask_rects: list[list[int]]
    color: str | list[int] = "mean"
    variant: str = "T"
    texture_in_mask: bool = False
    seed: int = 0
    steps: int = Field(default=27, ge=1)


def _decode(image_b64: str) -> np.ndarray:
    try:
        raw = base64.b64decode(image_b64, validate=True)
    except (binascii.Error, ValueError):
        raise ApiError(400, "bad_image", "image is not valid base64")
    try:
        img = decode_png(raw)
    except DecodeError as exc:
        raise ApiError(400, "bad_image", str(exc))
    if max(img.shape[:2]) > MAX_SIDE:
        raise ApiError(413, "too_large", f"image sides must be <= {MAX_SIDE}")
    return img


def _encode(img: np.ndarray) -> str:
    return base64.b64encode(encode_png(img)).decode("ascii")


def _palette(triples, field: str) -> Palette:
    try:
        return Palette.from_list(triples)
    except ValueError as exc:
        raise ApiError(400, "bad_palette", f"{field}: {exc}")


class CheckpointRegistry:
    """Immutable variant -> loaded checkpoint map, scanned at startup."""

    def __init__(self, directory):
        from .diffusion import load_checkpoint

        self.entries: dict = {}
        if directory and os.path.isdir(directory):
            for name in sorted(os.listdir(directory)):
                if not name.endswith(".ckpt"):
                    continue
                try:
                    ckpt = load_checkpoint(os.path.join(directory, name))
                except PaletteKitError:
                    continue
                if ckpt.variant and ckpt.variant not in self.entries:
                    denoiser = ckpt.build()
                    self.entries[ckpt.variant] = (name, ckpt, denoiser)

    def get(self, variant: str):
        if variant not in self.entries:
            raise ApiError(409, "checkpoint_unavailable",
                           f"no checkpoint loaded for variant {variant!r}")
        _, ckpt, denoiser = self.entries[variant]
        return ckpt, denoiser

    def get_for(self, variant: Variant):
        # texture-free stacks run on any control checkpoint
        if variant is Variant.NOTEX and variant.value not in self.entries:
            for fallback in sorted(self.entries):
                return self.get(fallback)
        return self.get(variant.value)

    def listing(self) -> list[dict]:
        return [
            {"variant": variant, "id": name, "image_size": ckpt.config.image_size}
            for variant, (name, ckpt, _) in sorted(self.entries.items())
        ]


def create_app(checkpoint_dir=None) -> FastAPI:
    app = FastAPI(title="palettekit", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    registry = CheckpointRegistry(checkpoint_dir)

    @app.exception_handler(ApiError)
    async def api_error_handler(request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"error": {"code": exc.code, "message": exc.message}},
        )

    @app.get("/api/checkpoints")
    def list_checkpoints():
        return {"checkpoints": registry.listing()}

    @app.post("/api/quantize")
    def quantize(req: QuantizeRequest):
        img = _decode(req.image)
        q = median_cut(img, req.colors)
        return {
            "id": req.id,
            "quantized_image": _encode(render(q)),
            "palette": q.palette.to_list(),
        }

    @app.post("/api/transfer")
    def transfer(req: TransferRequest):
        img = _decode(req.quantized_image)
        src = _palette(req.palette, "palette")
        tgt = _palette(req.target_palette, "target_palette")
        try:
            mode = TransferMode.parse(req.mode)
        except ValueError as exc:
            raise ApiError(400, "bad_mode", str(exc))
        q = project_to_palette(img, src)
        try:
            out = transfer_palette(q, tgt, mode)
        except SizeMismatchError as exc:
            raise ApiError(400, "palette_size_mismatch", str(exc))
        return {
            "id": req.id,
            "quantized_image": _encode(render(out)),
            "palette": out.palette.to_list(),
        }

    @app.post("/api/dequantize")
    def dequantize_endpoint(req: DequantizeRequest):
        from .conditioning import build_dequant_stack
        from .diffusion import SamplerConfig, sample
        from .image import luminance, replace_luminance

        try:
            variant = Variant.parse(req.variant)
        except ValueError as exc:
            raise ApiError(400, "bad_variant", str(exc))
        img = _decode(req.quantized_image)
        texture = _decode(req.texture_image) if req.texture_image else None
        if (req.texture_on or req.l_post) and texture is None:
            raise ApiError(400, "missing_texture",
                           "texture_on/l_post requires texture_image")
        if texture is not None and texture.shape != img.shape:
            raise ApiError(400, "dimension_mismatch",
                           "texture_image must match quantized_image dimensions")
        ckpt, denoiser = registry.get_for(variant)
        q = median_cut(img, req.colors)
        stack = build_dequant_stack(q, req.colors, variant, texture, req.texture_on)
        out = sample(denoiser, stack, ckpt.schedule,
                     SamplerConfig(steps=req.steps, seed=req.seed))
        if req.l_post:
            out = replace_luminance(out, luminance(texture))
        return {"id": req.id, "image": _encode(out)}

    @app.post("/api/inpaint")
    def inpaint(req: InpaintRequest):
        from .diffusion import SamplerConfig, sample

        try:
            variant = Variant.parse(req.variant)
        except ValueError as exc:
            raise ApiError(400, "bad_variant", str(exc))
        img = _decode(req.image)
        rects = []
        for r in req.mask_rects:
            if len(r) != 4:
                raise ApiError(400, "bad_mask", "mask rects must be [top,left,height,width]")
            rects.append(tuple(int(v) for v in r))
        fill = req.color if req.color == "mean" else tuple(int(c) for c in req.color)
        if fill != "mean" and (len(fill) != 3 or any(not 0 <= c <= 255 for c in fill)):
            raise ApiError(400, "bad_color", "color must be 'mean' or [r,g,b] in [0,255]")
        ckpt, denoiser = registry.get_for(variant)
        try:
            stack = build_inpaint_stack(img, MaskSpec(tuple(rects)), fill, variant,
                                        texture_in_mask=req.texture_in_mask)
        except OutOfBoundsError as exc:
            raise ApiError(400, "out_of_bounds", str(exc))
        except PaletteKitError as exc:
            raise ApiError(400, exc.code, str(exc))
        out = sample(denoiser, stack, ckpt.schedule,
                     SamplerConfig(steps=req.steps, seed=req.seed))
        return {"id": req.id, "image": _encode(out)}

    return app

"""palettekit: palette-based image editing with a diffusion dequantizer.

Quantize images with median cut, remap palettes through weighted
bipartite matching, and restore natural images from quantized inputs
with a small conditional denoising-diffusion model (7-channel
conditioning: quantized RGB, palette indicator, texture channels,
texture indicator). Includes color-conditioned patch inpainting,
image-quality metrics, an evaluation harness, a CLI, and an HTTP API.
"""

from .image import (
    AugmentationConfig,
    augment_hsv,
    gradients,
    load_image,
    luminance,
    mean_color,
    replace_luminance,
    save_image,
    threshold_gradients,
)
from .quantize import IndexedImage, Palette, PaletteSpec, median_cut, project_to_palette, render
from .transfer import (
    Assignment,
    TransferMode,
    build_cost,
    resample_colormap,
    solve_assignment,
    transfer_palette,
)
from .conditioning import (
    MaskSpec,
    Variant,
    build_dequant_stack,
    build_inpaint_stack,
    random_mask,
)
from .metrics import Aggregate, MetricReport, aggregate, palette_error, psnr, ssim
from .data import ImageFolderDataset, ProceduralDataset, toy_image

__version__ = "0.1.0"

__all__ = [
    "AugmentationConfig",
    "augment_hsv",
    "gradients",
    "load_image",
    "luminance",
    "mean_color",
    "replace_luminance",
    "save_image",
    "threshold_gradients",
    "IndexedImage",
    "Palette",
    "PaletteSpec",
    "median_cut",
    "project_to_palette",
    "render",
    "Assignment",
    "TransferMode",
    "build_cost",
    "resample_colormap",
    "solve_assignment",
    "transfer_palette",
    "MaskSpec",
    "Variant",
    "build_dequant_stack",
    "build_inpaint_stack",
    "random_mask",
    "Aggregate",
    "MetricReport",
    "aggregate",
    "palette_error",
    "psnr",
    "ssim",
    "ImageFolderDataset",
    "ProceduralDataset",
    "toy_image",
    "__version__",
]

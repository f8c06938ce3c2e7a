"""Walkthrough: median-cut quantization and bipartite palette transfer.

Quantizes a procedural image at several palette sizes, then remaps its
palette from a donor image in both matching modes and from a shipped
colormap. Writes PNGs into demos/out/.
"""

import os
from importlib import resources

import numpy as np

import palettekit as pk
from palettekit.data import toy_image
from palettekit.transfer import load_colormap

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

source = toy_image(seed=2026, index=0, size=96)
donor = toy_image(seed=2026, index=5, size=96)
pk.save_image(f"{OUT}/01_source.png", source)
pk.save_image(f"{OUT}/01_donor.png", donor)

# Fidelity improves monotonically (on average) as the palette doubles.
print("palette size -> reconstruction error")
for n in (4, 8, 16, 32):
    q = pk.median_cut(source, n)
    mse = np.mean((pk.render(q).astype(float) - source.astype(float)) ** 2)
    print(f"  N={n:>3}: {len(q.palette):>3} colors, MSE {mse:7.1f}")
    pk.save_image(f"{OUT}/01_quantized_n{n}.png", pk.render(q))

# Palette transfer: quantize both images at the same size, match palettes,
# remap. 'color' keeps each source color close; 'negative-color' flips it.
q_src = pk.median_cut(source, 8)
q_donor = pk.median_cut(donor, 8)
for mode in pk.TransferMode:
    remapped = pk.transfer_palette(q_src, q_donor.palette, mode)
    assert np.array_equal(remapped.indices, q_src.indices)  # structure untouched
    pk.save_image(f"{OUT}/01_transfer_{mode.value}.png", pk.render(remapped))
    print(f"transfer {mode.value}: palette {remapped.palette.to_list()[:3]}...")

# Colormaps ship as JSON stop lists; resample to the palette size you need.
with resources.as_file(
    resources.files("palettekit").joinpath("assets/colormaps/viridis.json")
) as path:
    stops = load_colormap(path)
viridis8 = pk.resample_colormap(stops, len(q_src.palette))
remapped = pk.transfer_palette(q_src, viridis8, pk.TransferMode.COLOR)
pk.save_image(f"{OUT}/01_transfer_viridis.png", pk.render(remapped))
print(f"wrote results to {OUT}/")

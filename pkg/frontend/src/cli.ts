// "Copy as CLI command": rebuild the exact terminal invocation that
// reproduces a history entry byte for byte (same inputs, same seed).

import type { HistoryEntry } from "./state.js";
import type { DequantizeRequest, InpaintRequest } from "./types.js";

export interface CliFiles {
  input: string; // path the user saves the request's input image to
  textureSrc?: string; // path for the texture source, when used
  out: string;
}

export function cliCommandFor(entry: HistoryEntry, files: CliFiles): string {
  if (entry.endpoint === "dequantize") {
    return dequantizeCommand(entry.request as DequantizeRequest, files);
  }
  return inpaintCommand(entry.request as InpaintRequest, files);
}

function dequantizeCommand(req: DequantizeRequest, files: CliFiles): string {
  const parts = [
    "palettekit dequantize",
    `--input ${files.input}`,
    `--colors ${req.colors}`,
    "--checkpoint <checkpoint.ckpt>",
    `--variant ${req.variant}`,
    `--texture ${req.texture_on ? "on" : "off"}`,
  ];
  if (req.texture_image && files.textureSrc) {
    parts.push(`--texture-src ${files.textureSrc}`);
  }
  if (req.l_post) {
    parts.push("--l-post");
  }
  parts.push(`--seed ${req.seed}`, `--steps ${req.steps}`, `--out ${files.out}`);
  return parts.join(" ");
}

function inpaintCommand(req: InpaintRequest, files: CliFiles): string {
  const parts = [
    "palettekit inpaint",
    `--input ${files.input}`,
  ];
  for (const [t, l, h, w] of req.mask_rects) {
    parts.push(`--mask-rect ${t},${l},${h},${w}`);
  }
  const color = req.color === "mean" ? "mean" : req.color.join(",");
  parts.push(
    `--color ${color}`,
    "--checkpoint <checkpoint.ckpt>",
    `--variant ${req.variant}`,
  );
  if (req.texture_in_mask) {
    parts.push("--texture-in-mask");
  }
  parts.push(`--seed ${req.seed}`, `--steps ${req.steps}`, `--out ${files.out}`);
  return parts.join(" ");
}

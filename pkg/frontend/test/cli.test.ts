import { describe, expect, it } from "vitest";

import { cliCommandFor } from "../src/cli.js";
import type { HistoryEntry } from "../src/state.js";

describe("copy as CLI command", () => {
  it("rebuilds a dequantize invocation with every setting", () => {
    const entry: HistoryEntry = {
      id: 3,
      endpoint: "dequantize",
      request: {
        quantized_image: "Q",
        colors: 16,
        variant: "L",
        texture_on: true,
        texture_image: "TEX",
        l_post: true,
        seed: 42,
        steps: 27,
      },
      imageB64: "R",
    };
    const cmd = cliCommandFor(entry, {
      input: "quantized.png",
      textureSrc: "source.png",
      out: "result-3.png",
    });
    expect(cmd).toBe(
      "palettekit dequantize --input quantized.png --colors 16 " +
        "--checkpoint <checkpoint.ckpt> --variant L --texture on " +
        "--texture-src source.png --l-post --seed 42 --steps 27 --out result-3.png",
    );
  });

  it("omits texture flags when texture is off", () => {
    const entry: HistoryEntry = {
      id: 1,
      endpoint: "dequantize",
      request: {
        quantized_image: "Q",
        colors: 8,
        variant: "T",
        texture_on: false,
        l_post: false,
        seed: 0,
        steps: 27,
      },
      imageB64: "R",
    };
    const cmd = cliCommandFor(entry, { input: "q.png", out: "out.png" });
    expect(cmd).toContain("--texture off");
    expect(cmd).not.toContain("--texture-src");
    expect(cmd).not.toContain("--l-post");
  });

  it("rebuilds an inpaint invocation with rects and color", () => {
    const entry: HistoryEntry = {
      id: 2,
      endpoint: "inpaint",
      request: {
        image: "SRC",
        mask_rects: [
          [2, 3, 4, 5],
          [10, 10, 2, 2],
        ],
        color: [250, 10, 10],
        variant: "G",
        texture_in_mask: true,
        seed: 9,
        steps: 13,
      },
      imageB64: "R",
    };
    const cmd = cliCommandFor(entry, { input: "source.png", out: "result-2.png" });
    expect(cmd).toBe(
      "palettekit inpaint --input source.png --mask-rect 2,3,4,5 " +
        "--mask-rect 10,10,2,2 --color 250,10,10 --checkpoint <checkpoint.ckpt> " +
        "--variant G --texture-in-mask --seed 9 --steps 13 --out result-2.png",
    );
  });

  it("uses 'mean' for mean fills", () => {
    const entry: HistoryEntry = {
      id: 4,
      endpoint: "inpaint",
      request: {
        image: "SRC",
        mask_rects: [[0, 0, 4, 4]],
        color: "mean",
        variant: "T",
        texture_in_mask: false,
        seed: 1,
        steps: 27,
      },
      imageB64: "R",
    };
    expect(cliCommandFor(entry, { input: "s.png", out: "o.png" })).toContain("--color mean");
  });
});

// App wiring: load an image, quantize it, edit swatches, transfer or
// inpaint, generate dequantized results, and replay history entries.

import { ApiClient, ApiError } from "./api.js";
import {
  base64ToRgba,
  downloadBase64Png,
  drawRectOverlay,
  drawZoomed,
  fileToBase64Png,
  rgbaToBase64Png,
} from "./canvas.js";
import { cliCommandFor } from "./cli.js";
import {
  hexToRgb,
  projectToPalette,
  renderIndexed,
  rgbToHex,
} from "./pixels.js";
import {
  EditorState,
  GenerationQueue,
  appendHistory,
  buildDequantRequest,
  buildInpaintRequest,
  editSwatch,
  effectivePalette,
  initialState,
  normalizedRect,
  setQuantized,
} from "./state.js";
import type { Rgb, Variant } from "./types.js";

let state: EditorState = initialState();
let api = new ApiClient();
const queue = new GenerationQueue();
let indices: Int32Array | null = null;
let imageSize: { width: number; height: number } | null = null;
let zoom = 1;
let dragStart: { x: number; y: number } | null = null;

const $ = <T extends HTMLElement>(id: string): T =>
  document.getElementById(id) as T;

function toast(message: string, isError = true): void {
  const el = $("toast");
  el.textContent = message;
  el.className = isError ? "toast error" : "toast";
  el.style.opacity = "1";
  setTimeout(() => (el.style.opacity = "0"), 4000);
}

function reportError(err: unknown): void {
  if (err instanceof ApiError) {
    toast(`server ${err.status} [${err.code}]: ${err.message}`);
  } else {
    toast(String(err));
  }
}

async function refreshCheckpoints(): Promise<void> {
  try {
    const entries = await api.checkpoints();
    $("checkpoints").textContent = entries.length
      ? entries.map((e) => `${e.variant} (${e.image_size}px)`).join(", ")
      : "none loaded";
  } catch (err) {
    $("checkpoints").textContent = "server unreachable";
  }
}

async function onFileChosen(file: File): Promise<void> {
  state = { ...initialState(), settings: state.settings };
  state.sourceB64 = await fileToBase64Png(file);
  await drawZoomed($("source-canvas") as unknown as HTMLCanvasElement, state.sourceB64);
  await quantizeNow();
}

async function quantizeNow(): Promise<void> {
  if (!state.sourceB64) return;
  try {
    const res = await api.quantize({
      image: state.sourceB64,
      colors: state.settings.colors,
    });
    state = setQuantized(state, res.quantized_image, res.palette);
    const rgba = await base64ToRgba(res.quantized_image);
    imageSize = { width: rgba.width, height: rgba.height };
    indices = projectToPalette(rgba, state.palette);
    await redrawPreview();
    renderSwatches();
  } catch (err) {
    reportError(err);
  }
}

/** Current preview: server indices re-rendered with any swatch edits. */
function editedPreviewB64(): string | null {
  if (!indices || !imageSize) return state.quantizedB64;
  const palette = effectivePalette(state);
  return rgbaToBase64Png(renderIndexed(indices, palette, imageSize.width, imageSize.height));
}

async function redrawPreview(): Promise<void> {
  const preview = editedPreviewB64();
  if (!preview) return;
  zoom = await drawZoomed($("preview-canvas") as unknown as HTMLCanvasElement, preview);
  if (state.selection) {
    drawRectOverlay(
      $("preview-canvas") as unknown as HTMLCanvasElement,
      state.selection,
      zoom,
    );
  }
}

function renderSwatches(): void {
  const strip = $("swatches");
  strip.innerHTML = "";
  effectivePalette(state).forEach((color, i) => {
    const input = document.createElement("input");
    input.type = "color";
    input.value = rgbToHex(color);
    input.title = `swatch ${i}`;
    input.addEventListener("input", () => {
      state = editSwatch(state, i, hexToRgb(input.value));
      void redrawPreview();
    });
    strip.appendChild(input);
  });
}

function readSettings(): void {
  state.settings.colors = parseInt(($("colors") as HTMLSelectElement).value, 10);
  state.settings.variant = ($("variant") as HTMLSelectElement).value as Variant;
  state.settings.seed = parseInt(($("seed") as HTMLInputElement).value, 10) || 0;
  state.settings.steps = parseInt(($("steps") as HTMLInputElement).value, 10) || 27;
  state.settings.textureOn = ($("texture-on") as HTMLInputElement).checked;
  state.settings.lPost = ($("l-post") as HTMLInputElement).checked;
  state.settings.textureInMask = ($("texture-in-mask") as HTMLInputElement).checked;
}

function generate(): void {
  readSettings();
  const preview = editedPreviewB64();
  if (!preview || !state.sourceB64) {
    toast("load and quantize an image first");
    return;
  }
  const req = buildDequantRequest(state, preview, state.sourceB64 ?? undefined);
  queue.submit(async () => {
    try {
      setBusy(true);
      const res = await api.dequantize(req);
      state = appendHistory(state, "dequantize", req, res.image);
      await drawZoomed($("result-canvas") as unknown as HTMLCanvasElement, res.image);
      renderHistory();
    } catch (err) {
      reportError(err);
    } finally {
      setBusy(false);
    }
  });
}

function recolorPatch(): void {
  readSettings();
  if (!state.sourceB64 || !state.selection) {
    toast("draw a rectangle on the preview first");
    return;
  }
  if (state.selection.width === 0 || state.selection.height === 0) {
    toast("selection has zero area");
    return;
  }
  const useMean = ($("fill-mean") as HTMLInputElement).checked;
  const color: "mean" | Rgb = useMean
    ? "mean"
    : hexToRgb(($("fill-color") as HTMLInputElement).value);
  const req = buildInpaintRequest(state, state.sourceB64, state.selection, color);
  queue.submit(async () => {
    try {
      setBusy(true);
      const res = await api.inpaint(req);
      state = appendHistory(state, "inpaint", req, res.image);
      await drawZoomed($("result-canvas") as unknown as HTMLCanvasElement, res.image);
      renderHistory();
    } catch (err) {
      reportError(err);
    } finally {
      setBusy(false);
    }
  });
}

function setBusy(busy: boolean): void {
  ($("generate") as HTMLButtonElement).disabled = busy;
  ($("inpaint") as HTMLButtonElement).disabled = busy;
  $("busy").style.visibility = busy ? "visible" : "hidden";
}

function renderHistory(): void {
  const strip = $("history");
  strip.innerHTML = "";
  for (const entry of state.history) {
    const cell = document.createElement("div");
    cell.className = "history-entry";
    const img = document.createElement("img");
    img.src = `data:image/png;base64,${entry.imageB64}`;
    img.title = `#${entry.id} ${entry.endpoint}`;
    img.addEventListener("click", () => {
      void drawZoomed($("result-canvas") as unknown as HTMLCanvasElement, entry.imageB64);
    });
    const copy = document.createElement("button");
    copy.textContent = "copy as CLI";
    copy.addEventListener("click", () => {
      const command = cliCommandFor(entry, {
        input: entry.endpoint === "dequantize" ? "quantized.png" : "source.png",
        textureSrc: "source.png",
        out: `result-${entry.id}.png`,
      });
      void navigator.clipboard.writeText(command);
      toast("command copied", false);
    });
    cell.append(img, copy);
    strip.appendChild(cell);
  }
}

function canvasPixel(ev: MouseEvent): { x: number; y: number } {
  const canvas = $("preview-canvas") as unknown as HTMLCanvasElement;
  const rect = canvas.getBoundingClientRect();
  return {
    x: Math.floor((ev.clientX - rect.left) / zoom),
    y: Math.floor((ev.clientY - rect.top) / zoom),
  };
}

function wire(): void {
  $("file").addEventListener("change", (ev) => {
    const file = (ev.target as HTMLInputElement).files?.[0];
    if (file) void onFileChosen(file);
  });
  $("colors").addEventListener("change", () => {
    readSettings();
    void quantizeNow();
  });
  $("requantize").addEventListener("click", () => {
    readSettings();
    void quantizeNow();
  });
  $("generate").addEventListener("click", generate);
  $("inpaint").addEventListener("click", recolorPatch);
  $("download-quantized").addEventListener("click", () => {
    const preview = editedPreviewB64();
    if (preview) downloadBase64Png(preview, "quantized.png");
  });
  $("server").addEventListener("change", () => {
    api = new ApiClient(($("server") as HTMLInputElement).value);
    void refreshCheckpoints();
  });
  const preview = $("preview-canvas") as unknown as HTMLCanvasElement;
  preview.addEventListener("mousedown", (ev) => {
    dragStart = canvasPixel(ev as MouseEvent);
  });
  preview.addEventListener("mouseup", (ev) => {
    if (!dragStart) return;
    state.selection = normalizedRect(dragStart, canvasPixel(ev as MouseEvent));
    dragStart = null;
    void redrawPreview();
  });
  void refreshCheckpoints();
}

wire();

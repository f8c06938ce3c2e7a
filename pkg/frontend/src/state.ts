// Editor state and pure request-building logic. Everything here is
// DOM-free so the behavior is unit-testable.

import type {
  DequantizeRequest,
  InpaintRequest,
  Rgb,
  Variant,
} from "./types.js";

export interface Settings {
  colors: number;
  variant: Variant;
  seed: number;
  steps: number;
  textureOn: boolean;
  lPost: boolean;
  textureInMask: boolean;
}

export const DEFAULT_SETTINGS: Settings = {
  colors: 16,
  variant: "T",
  seed: 0,
  steps: 27,
  textureOn: false,
  lPost: false,
  textureInMask: false,
};

export interface Rect {
  top: number;
  left: number;
  height: number;
  width: number;
}

export interface HistoryEntry {
  id: number;
  endpoint: "dequantize" | "inpaint";
  request: DequantizeRequest | InpaintRequest;
  imageB64: string;
}

export interface EditorState {
  settings: Settings;
  sourceB64: string | null;
  quantizedB64: string | null;
  palette: Rgb[]; // palette as returned by the server
  overrides: (Rgb | null)[]; // per-swatch user edits
  selection: Rect | null;
  history: HistoryEntry[];
  nextId: number;
}

export function initialState(): EditorState {
  return {
    settings: { ...DEFAULT_SETTINGS },
    sourceB64: null,
    quantizedB64: null,
    palette: [],
    overrides: [],
    selection: null,
    history: [],
    nextId: 1,
  };
}

export function setQuantized(state: EditorState, imageB64: string, palette: Rgb[]): EditorState {
  return {
    ...state,
    quantizedB64: imageB64,
    palette,
    overrides: palette.map(() => null),
    selection: null,
  };
}

export function editSwatch(state: EditorState, index: number, color: Rgb): EditorState {
  if (index < 0 || index >= state.palette.length) {
    throw new RangeError(`swatch ${index} out of range`);
  }
  const overrides = state.overrides.slice();
  overrides[index] = color;
  return { ...state, overrides };
}

export function clearSwatch(state: EditorState, index: number): EditorState {
  const overrides = state.overrides.slice();
  overrides[index] = null;
  return { ...state, overrides };
}

/** Palette with user edits applied; swatch count always matches. */
export function effectivePalette(state: EditorState): Rgb[] {
  return state.palette.map((c, i) => state.overrides[i] ?? c);
}

export function hasEdits(state: EditorState): boolean {
  return state.overrides.some((o) => o !== null);
}

export function buildDequantRequest(
  state: EditorState,
  editedQuantizedB64: string,
  textureB64?: string,
): DequantizeRequest {
  const s = state.settings;
  const req: DequantizeRequest = {
    quantized_image: editedQuantizedB64,
    colors: s.colors,
    variant: s.variant,
    texture_on: s.textureOn,
    l_post: s.lPost,
    seed: s.seed,
    steps: s.steps,
  };
  if ((s.textureOn || s.lPost) && textureB64) {
    req.texture_image = textureB64;
  }
  return req;
}

export function buildInpaintRequest(
  state: EditorState,
  sourceB64: string,
  rect: Rect,
  color: "mean" | Rgb,
): InpaintRequest {
  const s = state.settings;
  return {
    image: sourceB64,
    mask_rects: [[rect.top, rect.left, rect.height, rect.width]],
    color,
    variant: s.variant,
    texture_in_mask: s.textureInMask,
    seed: s.seed,
    steps: s.steps,
  };
}

export function appendHistory(
  state: EditorState,
  endpoint: HistoryEntry["endpoint"],
  request: HistoryEntry["request"],
  imageB64: string,
): EditorState {
  const entry: HistoryEntry = { id: state.nextId, endpoint, request, imageB64 };
  return { ...state, history: [...state.history, entry], nextId: state.nextId + 1 };
}

export function normalizedRect(a: { x: number; y: number }, b: { x: number; y: number }): Rect {
  const top = Math.min(a.y, b.y);
  const left = Math.min(a.x, b.x);
  return {
    top,
    left,
    height: Math.abs(a.y - b.y),
    width: Math.abs(a.x - b.x),
  };
}

/** At most one request in flight; later submissions replace the queue slot. */
export class GenerationQueue {
  private inFlight = false;
  private queued: (() => Promise<void>) | null = null;

  submit(task: () => Promise<void>): void {
    if (this.inFlight) {
      this.queued = task;
      return;
    }
    void this.run(task);
  }

  get busy(): boolean {
    return this.inFlight;
  }

  private async run(task: () => Promise<void>): Promise<void> {
    this.inFlight = true;
    try {
      await task();
    } finally {
      this.inFlight = false;
      const next = this.queued;
      this.queued = null;
      if (next) {
        void this.run(next);
      }
    }
  }
}

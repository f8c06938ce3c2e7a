// Canvas/DOM helpers: base64 PNG <-> pixels, zoomed drawing, rect overlay.

import type { RgbaImage } from "./pixels.js";

export function stripDataUrl(dataUrl: string): string {
  const comma = dataUrl.indexOf(",");
  return dataUrl.slice(comma + 1);
}

export async function fileToBase64Png(file: File): Promise<string> {
  const bitmap = await createImageBitmap(file);
  const canvas = document.createElement("canvas");
  canvas.width = bitmap.width;
  canvas.height = bitmap.height;
  const ctx = canvas.getContext("2d")!;
  ctx.drawImage(bitmap, 0, 0);
  return stripDataUrl(canvas.toDataURL("image/png"));
}

export function base64ToImage(b64: string): Promise<HTMLImageElement> {
  return new Promise((resolve, reject) => {
    const img = new Image();
    img.onload = () => resolve(img);
    img.onerror = () => reject(new Error("could not decode image"));
    img.src = `data:image/png;base64,${b64}`;
  });
}

export async function base64ToRgba(b64: string): Promise<RgbaImage> {
  const img = await base64ToImage(b64);
  const canvas = document.createElement("canvas");
  canvas.width = img.naturalWidth;
  canvas.height = img.naturalHeight;
  const ctx = canvas.getContext("2d")!;
  ctx.drawImage(img, 0, 0);
  const data = ctx.getImageData(0, 0, canvas.width, canvas.height);
  return { width: data.width, height: data.height, data: data.data };
}

export function rgbaToBase64Png(img: RgbaImage): string {
  const canvas = document.createElement("canvas");
  canvas.width = img.width;
  canvas.height = img.height;
  const ctx = canvas.getContext("2d")!;
  ctx.putImageData(new ImageData(new Uint8ClampedArray(img.data), img.width, img.height), 0, 0);
  return stripDataUrl(canvas.toDataURL("image/png"));
}

export async function drawZoomed(
  canvas: HTMLCanvasElement,
  b64: string,
  maxSide = 320,
): Promise<number> {
  const img = await base64ToImage(b64);
  const zoom = Math.max(1, Math.floor(maxSide / Math.max(img.naturalWidth, img.naturalHeight)));
  canvas.width = img.naturalWidth * zoom;
  canvas.height = img.naturalHeight * zoom;
  const ctx = canvas.getContext("2d")!;
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(img, 0, 0, canvas.width, canvas.height);
  return zoom;
}

export function drawRectOverlay(
  canvas: HTMLCanvasElement,
  rect: { top: number; left: number; height: number; width: number },
  zoom: number,
): void {
  const ctx = canvas.getContext("2d")!;
  ctx.save();
  ctx.strokeStyle = "#ff3366";
  ctx.lineWidth = 2;
  ctx.setLineDash([6, 3]);
  ctx.strokeRect(rect.left * zoom, rect.top * zoom, rect.width * zoom, rect.height * zoom);
  ctx.restore();
}

export function downloadBase64Png(b64: string, filename: string): void {
  const a = document.createElement("a");
  a.href = `data:image/png;base64,${b64}`;
  a.download = filename;
  a.click();
}

// Wire types for the palettekit HTTP API (base64 PNG images, RGB triples).

export type Rgb = [number, number, number];

export interface QuantizeRequest {
  id?: string;
  image: string;
  colors: number;
}

export interface QuantizeResponse {
  id: string | null;
  quantized_image: string;
  palette: Rgb[];
}

export interface TransferRequest {
  id?: string;
  quantized_image: string;
  palette: Rgb[];
  target_palette: Rgb[];
  mode: "color" | "negative-color";
}

export interface DequantizeRequest {
  id?: string;
  quantized_image: string;
  colors: number;
  variant: Variant;
  texture_on: boolean;
  texture_image?: string;
  l_post: boolean;
  seed: number;
  steps: number;
}

export interface DequantizeResponse {
  id: string | null;
  image: string;
}

export interface InpaintRequest {
  id?: string;
  image: string;
  mask_rects: number[][];
  color: "mean" | Rgb;
  variant: Variant;
  texture_in_mask: boolean;
  seed: number;
  steps: number;
}

export interface CheckpointInfo {
  variant: string;
  id: string;
  image_size: number;
}

export type Variant = "noTex" | "L" | "G" | "T";

export interface ApiErrorBody {
  error: { code: string; message: string };
}

// Thin typed client for the palettekit HTTP API.

import type {
  ApiErrorBody,
  CheckpointInfo,
  DequantizeRequest,
  DequantizeResponse,
  InpaintRequest,
  QuantizeRequest,
  QuantizeResponse,
  TransferRequest,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, public code: string, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string = "http://127.0.0.1:8765",
    private fetchImpl: typeof fetch = fetch,
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) {
      let code = `http_${response.status}`;
      let message = response.statusText;
      try {
        const parsed = (await response.json()) as ApiErrorBody;
        if (parsed.error) {
          code = parsed.error.code;
          message = parsed.error.message;
        }
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  quantize(req: QuantizeRequest): Promise<QuantizeResponse> {
    return this.post("/api/quantize", req);
  }

  transfer(req: TransferRequest): Promise<QuantizeResponse> {
    return this.post("/api/transfer", req);
  }

  dequantize(req: DequantizeRequest): Promise<DequantizeResponse> {
    return this.post("/api/dequantize", req);
  }

  inpaint(req: InpaintRequest): Promise<DequantizeResponse> {
    return this.post("/api/inpaint", req);
  }

  async checkpoints(): Promise<CheckpointInfo[]> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/checkpoints`);
    if (!response.ok) {
      throw new ApiError(response.status, `http_${response.status}`, response.statusText);
    }
    const body = (await response.json()) as { checkpoints: CheckpointInfo[] };
    return body.checkpoints;
  }
}

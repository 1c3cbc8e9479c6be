/** Typed client for the service API; errors carry the server's error_code. */

import type {
  AnnotationPayload,
  AnnotationRecord,
  LanguageName,
  ModelInfo,
  OcrTagResponse,
  RunRecord,
  TagResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly errorCode: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function parseError(response: Response): Promise<ApiError> {
  let code = "UNKNOWN_ERROR";
  let message = `HTTP ${response.status}`;
  try {
    const body = await response.json();
    if (body && typeof body.error_code === "string") {
      code = body.error_code;
      message = body.message ?? message;
    }
  } catch {
    // non-JSON error body; keep defaults
  }
  return new ApiError(response.status, code, message);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async requestJson<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  tag(text: string, language: LanguageName, modelId?: string | null): Promise<TagResponse> {
    const body: Record<string, unknown> = { text, language };
    if (modelId) body.model_id = modelId;
    return this.requestJson<TagResponse>("/api/tag", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  ocrTag(image: Blob, filename: string, language: LanguageName, modelId?: string | null): Promise<OcrTagResponse> {
    const form = new FormData();
    form.append("image", image, filename);
    form.append("language", language);
    if (modelId) form.append("model_id", modelId);
    return this.requestJson<OcrTagResponse>("/api/ocr-tag", { method: "POST", body: form });
  }

  models(): Promise<ModelInfo[]> {
    return this.requestJson<ModelInfo[]>("/api/models");
  }

  startRun(modelType: string, config: Record<string, unknown>): Promise<{ run_id: string }> {
    return this.requestJson<{ run_id: string }>("/api/runs", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ model_type: modelType, config }),
    });
  }

  getRun(runId: string): Promise<RunRecord> {
    return this.requestJson<RunRecord>(`/api/runs/${runId}`);
  }

  metricsCsvUrl(runId: string): string {
    return `${this.baseUrl}/api/runs/${runId}/metrics.csv`;
  }

  saveAnnotation(payload: AnnotationPayload): Promise<{ record_id: string }> {
    return this.requestJson<{ record_id: string }>("/api/annotations", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  listAnnotations(): Promise<AnnotationRecord[]> {
    return this.requestJson<AnnotationRecord[]>("/api/annotations");
  }
}

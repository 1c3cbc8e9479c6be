/** Payload shapes of the HTTP API (the UI's only data source). */

export type EntityTypeName = "PER" | "ORG" | "LOC";
export type LanguageName = "hausa" | "igbo" | "yoruba" | "unknown";

export interface TokenPayload {
  text: string;
  start_char: number;
  end_char: number;
}

export interface SpanPayload {
  type: EntityTypeName;
  start_tok: number;
  end_tok: number;
  start_char: number;
  end_char: number;
  surface: string;
}

export interface TagResponse {
  tokens: TokenPayload[];
  entities: SpanPayload[];
  model_id: string;
  language: LanguageName;
}

export interface OcrTagResponse extends TagResponse {
  extracted_text: string;
}

export interface ModelInfo {
  model_id: string;
  model_type: "crf" | "bilstm";
  created_at: string;
  languages: LanguageName[];
}

export interface RunEpochRow {
  epoch: number;
  training_loss: number;
  validation_loss: number;
  precision: number;
  recall: number;
  f1: number;
  accuracy: number;
}

export interface RunRecord {
  run_id: string;
  model_type: string;
  status: "running" | "done" | "failed";
  history: RunEpochRow[];
  error: string | null;
  corpus_fingerprint: string;
  test_metrics: Record<string, number> | null;
}

export interface AnnotationPayload {
  text: string;
  language: LanguageName;
  spans: SpanPayload[];
  provenance: "model_suggested" | "human_corrected";
}

export interface AnnotationRecord extends AnnotationPayload {
  record_id: string;
  created_at: string;
}

/**
 * Client-side state. Every entity in the edit buffer is traceable either to
 * a server tag response or to an explicit user edit; the UI itself never
 * invents spans.
 */
export interface ViewState {
  text: string;
  language: LanguageName;
  modelId: string | null;
  tagResponse: TagResponse | null;
  editBuffer: SpanPayload[];
  dirty: boolean;
  watchedRunId: string | null;
}

export const ENTITY_COLORS: Record<EntityTypeName, string> = {
  PER: "#d97706", // amber
  ORG: "#7c3aed", // violet
  LOC: "#059669", // green
};

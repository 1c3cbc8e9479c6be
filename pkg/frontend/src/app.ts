/** Page wiring: tag view, annotation editor, OCR upload, training dashboard. */

import { ApiClient, ApiError } from "./api.js";
import { buildDashboardCharts } from "./charts.js";
import { DashboardController, DashboardState } from "./dashboard.js";
import { renderHighlights } from "./highlight.js";
import {
  SpanOverlapError,
  addSpan,
  deleteSpan,
  retypeSpan,
  spanFromTokenRange,
  toAnnotationPayload,
} from "./spans.js";
import type { EntityTypeName, LanguageName, ViewState } from "./types.js";

const ENTITY_TYPES: EntityTypeName[] = ["PER", "ORG", "LOC"];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function showError(target: HTMLElement, error: unknown): void {
  target.textContent =
    error instanceof ApiError ? `${error.errorCode}: ${error.message}` : String(error);
  target.classList.remove("hidden");
}

export function startApp(): void {
  const api = new ApiClient("");
  const state: ViewState = {
    text: "",
    language: "igbo",
    modelId: null,
    tagResponse: null,
    editBuffer: [],
    dirty: false,
    watchedRunId: null,
  };

  // -- tabs
  const tabs = Array.from(document.querySelectorAll<HTMLButtonElement>(".tab"));
  for (const tab of tabs) {
    tab.addEventListener("click", () => {
      if (state.dirty && !window.confirm("Discard unsaved annotation edits?")) return;
      if (state.dirty) {
        state.dirty = false;
      }
      for (const other of tabs) other.classList.toggle("active", other === tab);
      for (const panel of document.querySelectorAll<HTMLElement>(".panel")) {
        panel.classList.toggle("hidden", panel.id !== `panel-${tab.dataset.panel}`);
      }
    });
  }
  window.addEventListener("beforeunload", (event) => {
    if (state.dirty) event.preventDefault();
  });

  // -- shared language/model pickers
  const languageSelect = el<HTMLSelectElement>("language");
  languageSelect.addEventListener("change", () => {
    state.language = languageSelect.value as LanguageName;
  });
  const modelSelect = el<HTMLSelectElement>("model");
  void api
    .models()
    .then((models) => {
      for (const model of models) {
        const option = document.createElement("option");
        option.value = model.model_id;
        option.textContent = `${model.model_type} · ${model.created_at}`;
        modelSelect.appendChild(option);
      }
    })
    .catch(() => undefined);
  modelSelect.addEventListener("change", () => {
    state.modelId = modelSelect.value || null;
  });

  // -- tag & annotate view
  const input = el<HTMLTextAreaElement>("text-input");
  const highlightBox = el<HTMLElement>("highlights");
  const spanList = el<HTMLElement>("span-list");
  const tagError = el<HTMLElement>("tag-error");

  function refreshAnnotationView(): void {
    renderHighlights(highlightBox, state.text, state.editBuffer);
    spanList.textContent = "";
    state.editBuffer.forEach((span, index) => {
      const row = document.createElement("div");
      row.className = "span-row";
      const label = document.createElement("span");
      label.textContent = `${span.surface} [${span.start_tok}..${span.end_tok}]`;
      row.appendChild(label);
      const select = document.createElement("select");
      for (const entityType of ENTITY_TYPES) {
        const option = document.createElement("option");
        option.value = entityType;
        option.textContent = entityType;
        option.selected = entityType === span.type;
        select.appendChild(option);
      }
      select.addEventListener("change", () => {
        state.editBuffer = retypeSpan(state.editBuffer, index, select.value as EntityTypeName);
        state.dirty = true;
        refreshAnnotationView();
      });
      row.appendChild(select);
      const remove = document.createElement("button");
      remove.textContent = "delete";
      remove.addEventListener("click", () => {
        state.editBuffer = deleteSpan(state.editBuffer, index);
        state.dirty = true;
        refreshAnnotationView();
      });
      row.appendChild(remove);
      spanList.appendChild(row);
    });
  }

  async function runTag(text: string): Promise<void> {
    tagError.classList.add("hidden");
    try {
      const response = await api.tag(text, state.language, state.modelId);
      state.text = text;
      state.tagResponse = response;
      state.editBuffer = response.entities.map((span) => ({ ...span }));
      state.dirty = false;
      refreshAnnotationView();
    } catch (error) {
      showError(tagError, error);
    }
  }

  el<HTMLButtonElement>("tag-button").addEventListener("click", () => {
    void runTag(input.value);
  });

  el<HTMLButtonElement>("add-span").addEventListener("click", () => {
    if (!state.tagResponse) return;
    tagError.classList.add("hidden");
    const startTok = Number(el<HTMLInputElement>("add-start").value);
    const endTok = Number(el<HTMLInputElement>("add-end").value);
    const entityType = el<HTMLSelectElement>("add-type").value as EntityTypeName;
    try {
      const span = spanFromTokenRange(
        state.tagResponse.tokens, state.text, startTok, endTok, entityType,
      );
      state.editBuffer = addSpan(state.editBuffer, span);
      state.dirty = true;
      refreshAnnotationView();
    } catch (error) {
      if (error instanceof SpanOverlapError || error instanceof RangeError) {
        showError(tagError, error.message);
      } else {
        showError(tagError, error);
      }
    }
  });

  el<HTMLButtonElement>("save-annotation").addEventListener("click", () => {
    void (async () => {
      tagError.classList.add("hidden");
      try {
        const payload = toAnnotationPayload(state.text, state.language, state.editBuffer);
        const { record_id } = await api.saveAnnotation(payload);
        state.dirty = false;
        el<HTMLElement>("save-status").textContent = `saved as ${record_id}`;
      } catch (error) {
        showError(tagError, error);
      }
    })();
  });

  // -- OCR upload view
  const ocrError = el<HTMLElement>("ocr-error");
  el<HTMLButtonElement>("ocr-button").addEventListener("click", () => {
    void (async () => {
      ocrError.classList.add("hidden");
      const fileInput = el<HTMLInputElement>("ocr-file");
      const file = fileInput.files?.[0];
      if (!file) {
        showError(ocrError, "choose an image first");
        return;
      }
      try {
        const response = await api.ocrTag(file, file.name, state.language, state.modelId);
        input.value = response.extracted_text;
        state.text = response.extracted_text;
        state.tagResponse = response;
        state.editBuffer = response.entities.map((span) => ({ ...span }));
        refreshAnnotationView();
      } catch (error) {
        if (error instanceof ApiError && error.status === 503) {
          showError(ocrError, "OCR unavailable: no OCR command is configured on the server");
        } else {
          showError(ocrError, error);
        }
      }
    })();
  });

  // -- training dashboard
  const chartsBox = el<HTMLElement>("charts");
  const runStatus = el<HTMLElement>("run-status");
  const launchButton = el<HTMLButtonElement>("launch-run");

  const controller = new DashboardController(api, (dashboard: DashboardState) => {
    launchButton.disabled = controller.launchDisabled;
    runStatus.textContent =
      dashboard.phase === "conflict"
        ? `a run is already in progress: ${dashboard.message ?? ""}`
        : dashboard.phase + (dashboard.message ? ` — ${dashboard.message}` : "");
    runStatus.className = `run-status run-${dashboard.phase}`;
    chartsBox.textContent = "";
    const history = dashboard.record?.history ?? [];
    if (history.length > 0) {
      for (const chart of buildDashboardCharts(document, history)) {
        chartsBox.appendChild(chart);
      }
    }
  });

  launchButton.addEventListener("click", () => {
    const modelType = el<HTMLSelectElement>("run-model").value;
    const epochs = Number(el<HTMLInputElement>("run-epochs").value) || 5;
    const seed = Number(el<HTMLInputElement>("run-seed").value) || 42;
    void controller.launch(modelType, { epochs, seed });
  });
}

startApp();

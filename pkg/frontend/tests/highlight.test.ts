import { describe, expect, it } from "vitest";

import { renderHighlights, segmentText, validateSpans } from "../src/highlight.js";
import type { SpanPayload, TagResponse } from "../src/types.js";

// a verbatim server response shape for "Ngozi gara Abuja."
const SERVER_RESPONSE: TagResponse = {
  tokens: [
    { text: "Ngozi", start_char: 0, end_char: 5 },
    { text: "gara", start_char: 6, end_char: 10 },
    { text: "Abuja", start_char: 11, end_char: 16 },
    { text: ".", start_char: 16, end_char: 17 },
  ],
  entities: [
    { type: "PER", start_tok: 0, end_tok: 0, start_char: 0, end_char: 5, surface: "Ngozi" },
    { type: "LOC", start_tok: 2, end_tok: 2, start_char: 11, end_char: 16, surface: "Abuja" },
  ],
  model_id: "m1",
  language: "igbo",
};

describe("renderHighlights", () => {
  it("renders exactly the server's spans: count and offsets match", () => {
    const container = document.createElement("div");
    renderHighlights(container, "Ngozi gara Abuja.", SERVER_RESPONSE.entities);
    const marks = Array.from(container.querySelectorAll("mark.entity"));
    expect(marks).toHaveLength(SERVER_RESPONSE.entities.length);
    marks.forEach((mark, i) => {
      const span = SERVER_RESPONSE.entities[i];
      expect(Number(mark.getAttribute("data-start-char"))).toBe(span.start_char);
      expect(Number(mark.getAttribute("data-end-char"))).toBe(span.end_char);
      expect(mark.textContent).toBe(span.surface);
      expect(mark.getAttribute("data-type")).toBe(span.type);
    });
    // full text survives segmentation
    expect(container.textContent).toBe("Ngozi gara Abuja.");
  });

  it("hover title carries the entity type", () => {
    const container = document.createElement("div");
    renderHighlights(container, "Ngozi gara Abuja.", SERVER_RESPONSE.entities);
    const mark = container.querySelector("mark.entity-LOC") as HTMLElement;
    expect(mark.title).toBe("LOC");
  });

  it("renders plain text with zero highlights for an empty entity list", () => {
    const container = document.createElement("div");
    renderHighlights(container, "gara gara", []);
    expect(container.querySelectorAll("mark")).toHaveLength(0);
    expect(container.textContent).toBe("gara gara");
  });

  it("rejects overlapping spans with a banner, never mis-highlights", () => {
    const container = document.createElement("div");
    const overlapping: SpanPayload[] = [
      { type: "PER", start_tok: 0, end_tok: 1, start_char: 0, end_char: 10, surface: "Ngozi gara" },
      { type: "LOC", start_tok: 1, end_tok: 2, start_char: 6, end_char: 16, surface: "gara Abuja" },
    ];
    renderHighlights(container, "Ngozi gara Abuja.", overlapping);
    expect(container.querySelector(".validation-banner")).not.toBeNull();
    expect(container.querySelectorAll("mark")).toHaveLength(0);
  });

  it("rejects spans outside the text", () => {
    const container = document.createElement("div");
    renderHighlights(container, "short", [
      { type: "LOC", start_tok: 0, end_tok: 0, start_char: 2, end_char: 99, surface: "x" },
    ]);
    expect(container.querySelector(".validation-banner")).not.toBeNull();
  });

  it("keeps diacritics intact and offsets code-point-accurate", () => {
    // "Ọlabisi lọ sí Eko." — server counts offsets in Unicode scalar values
    const text = "Ọlabisi lọ sí Eko.";
    const chars = Array.from(text);
    const start = chars.indexOf("E");
    const entities: SpanPayload[] = [
      { type: "PER", start_tok: 0, end_tok: 0, start_char: 0, end_char: 7, surface: "Ọlabisi" },
      { type: "LOC", start_tok: 3, end_tok: 3, start_char: start, end_char: start + 3, surface: "Eko" },
    ];
    const container = document.createElement("div");
    renderHighlights(container, text, entities);
    const marks = container.querySelectorAll("mark");
    expect(marks[0].textContent).toBe("Ọlabisi");
    expect(marks[1].textContent).toBe("Eko");
    expect(container.textContent).toBe(text);
  });
});

describe("validateSpans", () => {
  it("accepts the server response", () => {
    expect(validateSpans("Ngozi gara Abuja.", SERVER_RESPONSE.entities)).toBeNull();
  });

  it("names the offending offsets", () => {
    const message = validateSpans("abc", [
      { type: "LOC", start_tok: 0, end_tok: 0, start_char: 2, end_char: 2, surface: "" },
    ]);
    expect(message).toContain("2..2");
  });
});

describe("segmentText", () => {
  it("covers the text exactly once in order", () => {
    const segments = segmentText("Ngozi gara Abuja.", SERVER_RESPONSE.entities);
    expect(segments.map((s) => s.text).join("")).toBe("Ngozi gara Abuja.");
    expect(segments.filter((s) => s.type !== null)).toHaveLength(2);
  });
});

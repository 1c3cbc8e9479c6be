/** Entity highlighting over raw text using server character offsets.
 *
 * The renderer validates spans before touching the DOM: a malformed or
 * overlapping span set produces a visible banner and zero highlights,
 * never a silently wrong rendering.
 */

import type { SpanPayload } from "./types.js";

export interface Segment {
  text: string;
  type: SpanPayload["type"] | null;
  spanIndex: number | null;
}

/** Null when valid, else a human-readable reason the spans cannot render. */
export function validateSpans(text: string, entities: SpanPayload[]): string | null {
  const chars = Array.from(text).length;
  const sorted = [...entities].sort((a, b) => a.start_char - b.start_char);
  for (const span of sorted) {
    if (span.start_char < 0 || span.end_char > chars || span.start_char >= span.end_char) {
      return `span ${span.start_char}..${span.end_char} is outside the text`;
    }
  }
  for (let i = 1; i < sorted.length; i++) {
    if (sorted[i].start_char < sorted[i - 1].end_char) {
      return `spans ${sorted[i - 1].start_char}..${sorted[i - 1].end_char} and ` +
        `${sorted[i].start_char}..${sorted[i].end_char} overlap`;
    }
  }
  return null;
}

/**
 * Split text into plain and entity segments. Offsets count Unicode scalar
 * values, exactly as the server emits them, so slicing uses code points.
 */
export function segmentText(text: string, entities: SpanPayload[]): Segment[] {
  const codepoints = Array.from(text);
  const order = entities
    .map((span, index) => ({ span, index }))
    .sort((a, b) => a.span.start_char - b.span.start_char);
  const segments: Segment[] = [];
  let cursor = 0;
  for (const { span, index } of order) {
    if (span.start_char > cursor) {
      segments.push({ text: codepoints.slice(cursor, span.start_char).join(""), type: null, spanIndex: null });
    }
    segments.push({
      text: codepoints.slice(span.start_char, span.end_char).join(""),
      type: span.type,
      spanIndex: index,
    });
    cursor = span.end_char;
  }
  if (cursor < codepoints.length) {
    segments.push({ text: codepoints.slice(cursor).join(""), type: null, spanIndex: null });
  }
  return segments;
}

export function renderHighlights(
  container: HTMLElement,
  text: string,
  entities: SpanPayload[],
): void {
  container.textContent = "";
  const problem = validateSpans(text, entities);
  if (problem !== null) {
    const banner = container.ownerDocument.createElement("div");
    banner.className = "validation-banner";
    banner.textContent = `Cannot render entities: ${problem}`;
    container.appendChild(banner);
    const plain = container.ownerDocument.createElement("span");
    plain.textContent = text;
    container.appendChild(plain);
    return;
  }
  for (const segment of segmentText(text, entities)) {
    if (segment.type === null) {
      container.appendChild(container.ownerDocument.createTextNode(segment.text));
    } else {
      const mark = container.ownerDocument.createElement("mark");
      mark.className = `entity entity-${segment.type}`;
      mark.dataset.type = segment.type;
      const span = entities[segment.spanIndex!];
      mark.dataset.startChar = String(span.start_char);
      mark.dataset.endChar = String(span.end_char);
      mark.title = segment.type; // hover shows the entity type
      mark.textContent = segment.text;
      container.appendChild(mark);
    }
  }
}

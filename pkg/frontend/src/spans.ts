/** Edit-buffer operations for annotation correction.
 *
 * The buffer invariant: spans never overlap in token indices and always map
 * to valid character offsets of the displayed text. Offsets for new spans
 * are computed from the server's token list, never guessed.
 */

import type {
  AnnotationPayload,
  EntityTypeName,
  LanguageName,
  SpanPayload,
  TokenPayload,
} from "./types.js";

export class SpanOverlapError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SpanOverlapError";
  }
}

export function tokensOverlap(a: SpanPayload, b: SpanPayload): boolean {
  return !(a.end_tok < b.start_tok || a.start_tok > b.end_tok);
}

export function deleteSpan(buffer: SpanPayload[], index: number): SpanPayload[] {
  return buffer.filter((_, i) => i !== index);
}

export function retypeSpan(
  buffer: SpanPayload[],
  index: number,
  type: EntityTypeName,
): SpanPayload[] {
  return buffer.map((span, i) => (i === index ? { ...span, type } : span));
}

/** Build a span over a token range, computing char offsets from tokens. */
export function spanFromTokenRange(
  tokens: TokenPayload[],
  text: string,
  startTok: number,
  endTok: number,
  type: EntityTypeName,
): SpanPayload {
  if (startTok < 0 || endTok >= tokens.length || startTok > endTok) {
    throw new RangeError(`token range ${startTok}..${endTok} out of bounds`);
  }
  const startChar = tokens[startTok].start_char;
  const endChar = tokens[endTok].end_char;
  return {
    type,
    start_tok: startTok,
    end_tok: endTok,
    start_char: startChar,
    end_char: endChar,
    surface: Array.from(text).slice(startChar, endChar).join(""),
  };
}

export function addSpan(buffer: SpanPayload[], span: SpanPayload): SpanPayload[] {
  for (const existing of buffer) {
    if (tokensOverlap(existing, span)) {
      throw new SpanOverlapError(
        `tokens ${span.start_tok}..${span.end_tok} overlap the existing ` +
          `${existing.type} span at ${existing.start_tok}..${existing.end_tok}`,
      );
    }
  }
  return [...buffer, span].sort((a, b) => a.start_tok - b.start_tok);
}

export function toAnnotationPayload(
  text: string,
  language: LanguageName,
  buffer: SpanPayload[],
): AnnotationPayload {
  return { text, language, spans: buffer, provenance: "human_corrected" };
}

import { HighlightSpan } from "./types.js";

/** A run of text, marked if any key-phrase span covers it. */
export interface TextSegment {
  text: string;
  highlighted: boolean;
  /** Phrases covering this segment (empty when not highlighted). */
  phrases: string[];
}

/**
 * Convert UTF-8 byte offsets to JS string (UTF-16 code unit) offsets.
 *
 * Returns a map from every span boundary byte offset to its string offset.
 * Boundaries always fall on character edges because spans come from
 * substring matches on the same text.
 */
function byteToCharOffsets(text: string, byteOffsets: Set<number>): Map<number, number> {
  const encoder = new TextEncoder();
  const out = new Map<number, number>();
  let byte = 0;
  let unit = 0;
  if (byteOffsets.has(0)) out.set(0, 0);
  for (const ch of text) {
    byte += encoder.encode(ch).length;
    unit += ch.length;
    if (byteOffsets.has(byte)) out.set(byte, unit);
  }
  return out;
}

/**
 * Split text into contiguous segments, marking every region covered by at
 * least one highlight span. Overlapping spans merge; each highlighted
 * segment lists the phrases that cover it.
 */
export function segmentText(text: string, spans: HighlightSpan[]): TextSegment[] {
  if (text.length === 0) return [];
  const boundaries = new Set<number>();
  for (const s of spans) {
    boundaries.add(s.start);
    boundaries.add(s.end);
  }
  const charOf = byteToCharOffsets(text, boundaries);
  const cuts = new Set<number>([0, text.length]);
  for (const s of spans) {
    const a = charOf.get(s.start);
    const b = charOf.get(s.end);
    if (a !== undefined) cuts.add(a);
    if (b !== undefined) cuts.add(b);
  }
  const edges = Array.from(cuts).sort((x, y) => x - y);

  const segments: TextSegment[] = [];
  for (let i = 0; i + 1 < edges.length; i++) {
    const lo = edges[i];
    const hi = edges[i + 1];
    const phrases: string[] = [];
    for (const s of spans) {
      const a = charOf.get(s.start);
      const b = charOf.get(s.end);
      if (a !== undefined && b !== undefined && a <= lo && hi <= b) {
        if (!phrases.includes(s.phrase)) phrases.push(s.phrase);
      }
    }
    segments.push({
      text: text.slice(lo, hi),
      highlighted: phrases.length > 0,
      phrases: phrases.sort(),
    });
  }
  return segments;
}

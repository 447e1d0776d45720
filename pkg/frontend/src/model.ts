// View-model construction. Everything here is pure so it can be tested
// without a DOM; decorations come 1:1 from API span metadata, the client
// computes no diffs of its own.

import type {
  HypothesisPayload,
  QueryResponse,
  SpanPayload,
  StepPayload,
} from './types.js';

export interface Segment {
  text: string;
  bold: boolean;        // schema mention
  diff: boolean;        // highlighted difference
  value: boolean;       // literal value mention
}

/** Split step text into contiguous segments carrying the decorations of the
 * spans covering them. Segments concatenate back to the exact text. */
export function segmentText(text: string, spans: SpanPayload[]): Segment[] {
  const bounds = new Set<number>([0, text.length]);
  for (const span of spans) {
    bounds.add(Math.max(0, Math.min(span.start, text.length)));
    bounds.add(Math.max(0, Math.min(span.end, text.length)));
  }
  const points = [...bounds].sort((a, b) => a - b);
  const segments: Segment[] = [];
  for (let i = 0; i + 1 < points.length; i++) {
    const [start, end] = [points[i], points[i + 1]];
    if (start === end) continue;
    const active = spans.filter((s) => s.start <= start && end <= s.end);
    segments.push({
      text: text.slice(start, end),
      bold: active.some((s) => s.kind === 'schema_mention'),
      diff: active.some((s) => s.kind === 'diff'),
      value: active.some((s) => s.kind === 'value_note'),
    });
  }
  return segments;
}

export interface StepView {
  label: string;
  segments: Segment[];
}

export interface HypothesisCard {
  id: number;
  sql: string;
  score: number;
  tier: string;
  steps: StepView[];
  valueNotes: string[];
  defaultDisplay: boolean;
  selected: boolean;
}

export function buildCard(h: HypothesisPayload): HypothesisCard {
  const prefix = h.explanation.tier === 'shallow' ? 'step' : 'Step';
  return {
    id: h.id,
    sql: h.sql,
    score: h.weighted_score,
    tier: h.explanation.tier,
    steps: h.explanation.steps.map((step: StepPayload, i: number) => ({
      label: `${prefix} ${i + 1}:`,
      segments: segmentText(step.text, step.spans),
    })),
    valueNotes: h.value_notes,
    defaultDisplay: h.default_display,
    selected: false,
  };
}

export function buildCards(response: QueryResponse): HypothesisCard[] {
  return response.hypotheses.filter((h) => h.valid).map(buildCard);
}

/** The reveal button exists exactly when more than three cards are valid. */
export function hasMoreToShow(cards: HypothesisCard[]): boolean {
  return cards.length > 3;
}

export function visibleCards(cards: HypothesisCard[], showAll: boolean): HypothesisCard[] {
  return showAll ? cards : cards.filter((c) => c.defaultDisplay);
}

export function countDiffSegments(cards: HypothesisCard[]): number {
  let n = 0;
  for (const card of cards)
    for (const step of card.steps)
      for (const seg of step.segments) if (seg.diff) n++;
  return n;
}

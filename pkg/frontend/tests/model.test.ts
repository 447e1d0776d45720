import { describe, expect, it } from 'vitest';
import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import {
  buildCards,
  countDiffSegments,
  hasMoreToShow,
  segmentText,
  visibleCards,
} from '../src/model.js';
import type { QueryResponse, SpanPayload } from '../src/types.js';

const here = dirname(fileURLToPath(import.meta.url));
const fixture: QueryResponse = JSON.parse(
  readFileSync(join(here, 'fixtures', 'query_response.json'), 'utf-8')
);

describe('segmentText', () => {
  it('reassembles the exact text', () => {
    const spans: SpanPayload[] = [
      { start: 5, end: 12, kind: 'schema_mention', role: 'column', name: 't.c' },
      { start: 8, end: 20, kind: 'diff', others: [1] },
    ];
    const text = 'find the average age of the dogs table';
    const segments = segmentText(text, spans);
    expect(segments.map((s) => s.text).join('')).toBe(text);
  });

  it('carries decorations exactly where spans say', () => {
    const text = 'abcdef';
    const segments = segmentText(text, [
      { start: 1, end: 3, kind: 'schema_mention' },
      { start: 2, end: 5, kind: 'diff' },
    ]);
    const flags = segments.map((s) => `${s.text}:${s.bold ? 'b' : ''}${s.diff ? 'd' : ''}`);
    expect(flags).toEqual(['a:', 'b:b', 'c:bd', 'de:d', 'f:']);
  });

  it('handles empty spans and out-of-range bounds defensively', () => {
    const segments = segmentText('xy', [{ start: 0, end: 99, kind: 'diff' }]);
    expect(segments.map((s) => s.text).join('')).toBe('xy');
    expect(segments.every((s) => s.diff)).toBe(true);
  });
});

describe('buildCards on a captured response', () => {
  it('produces at least two cards for the flagship question', () => {
    const cards = buildCards(fixture);
    expect(cards.length).toBeGreaterThanOrEqual(2);
  });

  it('keeps at least one highlighted difference', () => {
    const cards = buildCards(fixture);
    expect(countDiffSegments(cards)).toBeGreaterThan(0);
  });

  it('derives decorations from API spans one for one', () => {
    const cards = buildCards(fixture);
    for (const [i, hyp] of fixture.hypotheses.entries()) {
      const card = cards[i];
      for (const [j, step] of hyp.explanation.steps.entries()) {
        const rebuilt = card.steps[j].segments.map((s) => s.text).join('');
        expect(rebuilt).toBe(step.text);
        const hasDiffSpan = step.spans.some((s) => s.kind === 'diff');
        const hasDiffSegment = card.steps[j].segments.some((s) => s.diff);
        expect(hasDiffSegment).toBe(hasDiffSpan);
      }
    }
  });

  it('labels steps by tier convention', () => {
    const cards = buildCards(fixture);
    for (const card of cards) {
      const prefix = card.tier === 'shallow' ? 'step' : 'Step';
      card.steps.forEach((step, i) => {
        expect(step.label).toBe(`${prefix} ${i + 1}:`);
      });
    }
  });

  it('drops invalid hypotheses', () => {
    const mixed: QueryResponse = JSON.parse(JSON.stringify(fixture));
    mixed.hypotheses[0].valid = false;
    expect(buildCards(mixed).length).toBe(fixture.hypotheses.length - 1);
  });
});

describe('show more', () => {
  it('appears exactly when more than three cards exist', () => {
    const cards = buildCards(fixture);
    expect(hasMoreToShow(cards)).toBe(cards.length > 3);
    expect(hasMoreToShow(cards.slice(0, 3))).toBe(false);
    expect(hasMoreToShow(cards.slice(0, 1))).toBe(false);
  });

  it('reveals everything without losing cards', () => {
    const cards = buildCards(fixture);
    const shown = visibleCards(cards, false);
    expect(shown.every((c) => c.defaultDisplay)).toBe(true);
    expect(shown.length).toBe(Math.min(3, cards.length));
    expect(visibleCards(cards, true).length).toBe(cards.length);
  });
});

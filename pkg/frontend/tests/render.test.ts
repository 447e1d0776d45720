import { describe, expect, it } from 'vitest';
import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import { buildCards } from '../src/model.js';
import {
  escapeHtml,
  renderCard,
  renderResultTable,
  renderSchemaTree,
  renderSegment,
} from '../src/render.js';
import type { ExecutionPayload, QueryResponse, SchemaPayload } from '../src/types.js';

const here = dirname(fileURLToPath(import.meta.url));
const load = (name: string) =>
  JSON.parse(readFileSync(join(here, 'fixtures', name), 'utf-8'));

const query: QueryResponse = load('query_response.json');
const schema: SchemaPayload = load('schema.json');
const result: ExecutionPayload = load('execute_result.json');

describe('escaping', () => {
  it('neutralizes markup in any text position', () => {
    expect(escapeHtml('<script>alert(1)</script>')).not.toContain('<script>');
    const html = renderSegment({ text: '<b>&"\'', bold: true, diff: true, value: false });
    expect(html).toContain('&lt;b&gt;&amp;&quot;&#39;');
  });
});

describe('card rendering', () => {
  const cards = buildCards(query);

  it('bolds schema mentions and highlights diffs', () => {
    const html = cards.map(renderCard).join('');
    expect(html).toContain('<strong class="schema">');
    expect(html).toContain('<mark class="diff">');
  });

  it('is keyboard reachable', () => {
    const html = renderCard(cards[0]);
    expect(html).toContain('tabindex="0"');
    expect(html).toContain('role="button"');
  });

  it('reveals SQL read-only', () => {
    const html = renderCard(cards[0]);
    expect(html).toContain('<details class="sql-reveal">');
    expect(html).toContain(escapeHtml(cards[0].sql));
  });

  it('marks the selected card', () => {
    const html = renderCard({ ...cards[0], selected: true });
    expect(html).toContain('class="card selected"');
    expect(html).toContain('aria-pressed="true"');
  });
});

describe('schema tree', () => {
  it('lists every table and column', () => {
    const html = renderSchemaTree(schema);
    for (const table of schema.tables) {
      expect(html).toContain(table.name);
      for (const column of table.columns) expect(html).toContain(column.name);
    }
  });
});

describe('result table', () => {
  it('renders a scalar shortcut for single-cell answers', () => {
    const html = renderResultTable(result);
    expect(html).toContain('class="scalar"');
  });

  it('renders a table with headers otherwise', () => {
    const html = renderResultTable({
      columns: ['name', 'age'],
      rows: [
        ['Kacey', 6],
        ['Mavis', 10],
      ],
      truncated: true,
      elapsed: 0.01,
    });
    expect(html).toContain('<th>name</th>');
    expect(html).toContain('<td>Kacey</td>');
    expect(html).toContain('result truncated');
  });
});

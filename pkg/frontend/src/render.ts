// HTML string builders. Text is always escaped; decorations become the
// classes the stylesheet knows about (bold schema mentions, highlighted
// diffs), mirroring the reference interface's visual language.

import type { ExecutionPayload, RowPage, SchemaPayload } from './types.js';
import type { HypothesisCard, Segment, StepView } from './model.js';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;')
    .replace(/'/g, '&#39;');
}

export function renderSegment(seg: Segment): string {
  let html = escapeHtml(seg.text);
  if (seg.bold) html = `<strong class="schema">${html}</strong>`;
  if (seg.value) html = `<em class="value">${html}</em>`;
  if (seg.diff) html = `<mark class="diff">${html}</mark>`;
  return html;
}

export function renderStep(step: StepView): string {
  const body = step.segments.map(renderSegment).join('');
  return `<li><span class="step-label">${escapeHtml(step.label)}</span> ${body}</li>`;
}

export function renderCard(card: HypothesisCard): string {
  const steps = card.steps.map(renderStep).join('');
  const notes = card.valueNotes.length
    ? `<div class="value-notes">${card.valueNotes
        .map((n) => `<div class="note">${escapeHtml(n)}</div>`)
        .join('')}</div>`
    : '';
  const selected = card.selected ? ' selected' : '';
  return (
    `<article class="card${selected}" data-id="${card.id}" tabindex="0" ` +
    `role="button" aria-pressed="${card.selected}">` +
    `<header><span class="badge tier-${card.tier}">${card.tier}</span>` +
    `<span class="badge score">score ${card.score.toFixed(2)}</span></header>` +
    `<ol class="steps">${steps}</ol>` +
    notes +
    `<details class="sql-reveal"><summary>SQL</summary>` +
    `<code>${escapeHtml(card.sql)}</code></details>` +
    `</article>`
  );
}

export function renderSchemaTree(schema: SchemaPayload): string {
  const tables = schema.tables
    .map((t) => {
      const cols = t.columns
        .map(
          (c) =>
            `<li class="col">${escapeHtml(c.name)}` +
            `<span class="affinity">${escapeHtml(c.affinity)}</span>` +
            (c.is_primary_key ? '<span class="pk">pk</span>' : '') +
            `</li>`
        )
        .join('');
      return (
        `<details class="table" data-table="${escapeHtml(t.name)}">` +
        `<summary>${escapeHtml(t.name)} <span class="rows">${t.row_count} rows</span></summary>` +
        `<ul>${cols}</ul></details>`
      );
    })
    .join('');
  return tables;
}

export function renderResultTable(result: ExecutionPayload | RowPage): string {
  const rows = result.rows;
  if (rows.length === 1 && rows[0].length === 1) {
    return `<div class="scalar">${escapeHtml(String(rows[0][0]))}</div>`;
  }
  const head = result.columns.map((c) => `<th>${escapeHtml(c)}</th>`).join('');
  const body = rows
    .map(
      (r) =>
        `<tr>${r.map((cell) => `<td>${escapeHtml(String(cell ?? ''))}</td>`).join('')}</tr>`
    )
    .join('');
  const truncated =
    'truncated' in result && result.truncated
      ? '<div class="truncated">result truncated</div>'
      : '';
  return `<table><thead><tr>${head}</tr></thead><tbody>${body}</tbody></table>${truncated}`;
}

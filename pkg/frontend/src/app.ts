// Interaction loop: pick a database, browse its schema and content, ask a
// question, compare the explained hypotheses, reveal more, run the one that
// matches the intent. State is per-tab; the server stays the source of truth.

import {
  ApiError,
  getSchema,
  getTablePage,
  listDatabases,
  postExecute,
  postQuery,
} from './api.js';
import {
  HypothesisCard,
  buildCards,
  hasMoreToShow,
  visibleCards,
} from './model.js';
import {
  renderCard,
  renderResultTable,
  renderSchemaTree,
  escapeHtml,
} from './render.js';

interface AppState {
  dbId: string | null;
  cards: HypothesisCard[];
  showAll: boolean;
  selectedId: number | null;
  inflight: AbortController | null;
}

const state: AppState = {
  dbId: null,
  cards: [],
  showAll: false,
  selectedId: null,
  inflight: null,
};

const $ = <T extends HTMLElement>(selector: string): T => {
  const el = document.querySelector(selector);
  if (!el) throw new Error(`missing element ${selector}`);
  return el as T;
};

function setBanner(message: string | null): void {
  const banner = $('#banner');
  banner.textContent = message ?? '';
  banner.classList.toggle('hidden', message === null);
}

async function refreshDatabases(): Promise<void> {
  const select = $('#db-select') as HTMLSelectElement;
  const entries = await listDatabases();
  select.innerHTML = entries.length
    ? entries
        .map(
          (e) =>
            `<option value="${escapeHtml(e.db_id)}">${escapeHtml(e.db_id)} ` +
            `(${e.table_count} tables)</option>`
        )
        .join('')
    : '<option value="">no databases configured</option>';
  if (entries.length) {
    await selectDatabase(entries[0].db_id);
  } else {
    $('#schema').innerHTML = '<p class="empty">Add database files to get started.</p>';
  }
}

async function selectDatabase(dbId: string): Promise<void> {
  state.dbId = dbId;
  state.cards = [];
  state.selectedId = null;
  renderCards();
  $('#result').innerHTML = '';
  const schema = await getSchema(dbId);
  $('#schema').innerHTML = renderSchemaTree(schema);
  document.querySelectorAll<HTMLElement>('#schema details.table').forEach((el) => {
    el.addEventListener('toggle', async () => {
      if (!(el as HTMLDetailsElement).open || el.dataset.loaded) return;
      el.dataset.loaded = '1';
      const page = await getTablePage(dbId, el.dataset.table!);
      const holder = document.createElement('div');
      holder.className = 'preview';
      holder.innerHTML = renderResultTable(page);
      el.appendChild(holder);
    });
  });
}

function renderCards(): void {
  const list = $('#cards');
  const shown = visibleCards(state.cards, state.showAll);
  list.innerHTML = shown
    .map((card) => renderCard({ ...card, selected: card.id === state.selectedId }))
    .join('');
  const moreButton = $('#show-more') as HTMLButtonElement;
  moreButton.classList.toggle('hidden', state.showAll || !hasMoreToShow(state.cards));
  list.querySelectorAll<HTMLElement>('.card').forEach((el) => {
    const pick = () => selectAndExecute(Number(el.dataset.id));
    el.addEventListener('click', pick);
    el.addEventListener('keydown', (event) => {
      if ((event as KeyboardEvent).key === 'Enter' || (event as KeyboardEvent).key === ' ') {
        event.preventDefault();
        pick();
      }
    });
  });
}

async function submitQuestion(): Promise<void> {
  const input = $('#question') as HTMLInputElement;
  const question = input.value.trim();
  if (!question || !state.dbId) return;
  state.inflight?.abort();
  const controller = new AbortController();
  state.inflight = controller;
  setBanner(null);
  state.selectedId = null;
  state.showAll = false;
  $('#result').innerHTML = '';
  $('#cards').innerHTML = '<p class="empty">thinking…</p>';
  try {
    const response = await postQuery(state.dbId, question, controller.signal);
    if (controller !== state.inflight) return; // superseded
    state.cards = buildCards(response);
    if (!state.cards.length) {
      $('#cards').innerHTML = '<p class="empty">no executable interpretation found</p>';
      return;
    }
    renderCards();
  } catch (error) {
    if ((error as DOMException).name === 'AbortError') return;
    const detail =
      error instanceof ApiError ? `${error.status}: ${error.message}` : String(error);
    $('#cards').innerHTML = '';
    setBanner(`query failed — ${detail}`);
  } finally {
    if (controller === state.inflight) state.inflight = null;
  }
}

async function selectAndExecute(id: number): Promise<void> {
  const card = state.cards.find((c) => c.id === id);
  if (!card || !state.dbId) return;
  state.selectedId = id;
  renderCards();
  $('#result').innerHTML = '<p class="empty">running…</p>';
  try {
    const result = await postExecute(state.dbId, card.sql);
    $('#result').innerHTML =
      `<h3>answer</h3>` + renderResultTable(result) +
      `<div class="elapsed">${(result.elapsed * 1000).toFixed(0)} ms</div>`;
  } catch (error) {
    const detail =
      error instanceof ApiError
        ? error.status === 408
          ? 'query timed out'
          : error.message
        : String(error);
    $('#result').innerHTML = `<p class="error">${escapeHtml(detail)}</p>`;
  }
}

export function start(): void {
  refreshDatabases().catch((error) => setBanner(String(error)));
  ($('#db-select') as HTMLSelectElement).addEventListener('change', (event) => {
    void selectDatabase((event.target as HTMLSelectElement).value);
  });
  $('#ask-form').addEventListener('submit', (event) => {
    event.preventDefault();
    void submitQuestion();
  });
  $('#show-more').addEventListener('click', () => {
    state.showAll = true;
    renderCards();
  });
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  start();
}

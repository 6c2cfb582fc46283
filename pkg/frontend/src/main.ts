import { ApiClient } from './api.js';
import { EvidenceCache, snippetText } from './evidence.js';
import { ExploreStore } from './explore.js';
import { keyAction } from './keyboard.js';
import { OfflineTracker } from './offline.js';
import { QueueStore } from './queue.js';
import type { Coverage, Suggestion, SuggestionKind, SuggestionStatus } from './types.js';

const api = new ApiClient('');
const offline = new OfflineTracker();
const queue = new QueueStore(api, 'reviewer', () => offline.noteFailure());
const evidence = new EvidenceCache(api);
const explore = new ExploreStore(api);

type Tab = 'queue' | 'explore' | 'coverage';
let activeTab: Tab = 'queue';

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function text(tag: string, content: string, cls?: string): HTMLElement {
  const node = document.createElement(tag);
  node.textContent = content;
  if (cls) node.className = cls;
  return node;
}

// -- queue view ---------------------------------------------------------------

function renderQueue(): void {
  const list = el<HTMLOListElement>('queue-list');
  list.replaceChildren();
  const items = queue.pageItems();
  el('queue-count').textContent = queue.loading
    ? 'loading...'
    : `${queue.items.length} item(s)`;
  el('page-label').textContent = `${queue.page + 1}/${queue.pageCount()}`;

  if (!items.length && !queue.loading) {
    list.append(text('li', 'queue is empty', 'empty-state'));
    return;
  }

  items.forEach((item, i) => {
    const li = document.createElement('li');
    li.className = 'card' + (i === queue.selected ? ' selected' : '')
      + (queue.isPending(item.id) ? ' pending' : '');
    li.addEventListener('click', () => queue.select(i));

    const head = document.createElement('div');
    head.className = 'card-head';
    head.append(
      text('span', item.kind, `kind kind-${item.kind}`),
      text('span', item.rendered, 'rendered'),
      text('span', `x${item.count}`, 'count'),
      text('span', item.status, `status status-${item.status}`),
    );
    li.append(head);

    const refs = item.evidence
      .map((e) => `${e.doc}:${e.segment}`)
      .join('  ');
    li.append(text('div', refs, 'refs'));

    const snippet = document.createElement('div');
    snippet.className = 'snippet';
    li.append(snippet);
    renderSnippet(item, snippet);

    if (item.status === 'SUGGESTED') {
      const actions = document.createElement('div');
      actions.className = 'actions';
      const accept = text('button', 'accept (a)');
      accept.addEventListener('click', (ev) => {
        ev.stopPropagation();
        void queue.decide(item, 'ACCEPT');
      });
      const reject = text('button', 'reject (x)');
      reject.addEventListener('click', (ev) => {
        ev.stopPropagation();
        void queue.decide(item, 'REJECT');
      });
      actions.append(accept, reject);
      li.append(actions);
    } else if (item.decided_by) {
      li.append(text('div', `decided by ${item.decided_by}`, 'refs'));
    }
    list.append(li);
  });
}

// every queue card shows the segment in context (one before, one after)
function renderSnippet(item: Suggestion, node: HTMLElement): void {
  const ref = item.evidence[0];
  if (!ref) {
    node.textContent = '(no evidence recorded)';
    return;
  }
  const hit = evidence.cached(ref);
  if (hit) {
    paintWindow(node, hit);
    return;
  }
  node.textContent = '...';
  offline.track(evidence.window(ref)).then(
    (window) => paintWindow(node, window),
    () => { node.textContent = '(evidence unavailable)'; },
  );
}

function paintWindow(node: HTMLElement, window: { text: string; focus: boolean }[]): void {
  node.replaceChildren();
  for (const seg of window) {
    const span = text('span', ` ${seg.text} `, seg.focus ? 'focus' : 'context');
    node.append(span);
  }
}

// -- explore view -------------------------------------------------------------

function renderInventory(): void {
  const panel = el('inventory-panel');
  panel.replaceChildren();
  const state = explore.inventory;
  if (state.state === 'empty') {
    panel.append(text('p', 'enter an entity to list its property values', 'empty-state'));
  } else if (state.state === 'unknown') {
    panel.append(text('p', `no property values recorded for "${state.entity}"`, 'empty-state'));
  } else {
    const table = document.createElement('table');
    for (const row of state.inventory.values) {
      const tr = document.createElement('tr');
      tr.append(text('td', row.value), text('td', String(row.count), 'num'));
      table.append(tr);
    }
    panel.append(table);
  }
}

function renderCluster(): void {
  const panel = el('cluster-panel');
  panel.replaceChildren();
  const state = explore.cluster;
  if (state.state === 'empty') {
    panel.append(text('p', 'enter a seed term to expand its cluster', 'empty-state'));
  } else if (state.state === 'unknown') {
    panel.append(text('p', `"${state.seed}" does not occur in this run`, 'empty-state'));
  } else {
    const c = state.cluster;
    panel.append(text('p', `${c.rounds} round(s) from ${c.kind} seed "${c.seed}"`));
    panel.append(text('h3', 'entities'), text('p', c.entities.join(', ') || '(none)'));
    panel.append(text('h3', 'values'), text('p', c.values.join(', ') || '(none)'));
  }
}

function renderClusterList(): void {
  const panel = el('cluster-list');
  panel.replaceChildren();
  if (!explore.allClusters.length) {
    panel.append(text('p', 'no clusters in this run', 'empty-state'));
    return;
  }
  for (const c of explore.allClusters) {
    const div = document.createElement('div');
    div.className = 'cluster-row';
    div.append(
      text('span', c.seed, 'seed'),
      text('span', `${c.entities.length} entities / ${c.values.length} values`, 'refs'),
      text('span', c.entities.join(', '), 'members'),
    );
    panel.append(div);
  }
}

// -- coverage view ------------------------------------------------------------

function coverageTable(cov: Coverage): HTMLElement {
  const table = document.createElement('table');
  const rows: Array<[string, string]> = [
    ['segments', String(cov.segments)],
    ['full parses', String(cov.full)],
    ['partial', String(cov.partial)],
    ['unparsed', String(cov.unparsed)],
    ['pattern-matched', String(cov.matched)],
    ['unmatched', String(cov.unmatched)],
    ['unknown (XXX) tokens', String(cov.xxx_tokens)],
    ['full-parse ratio', cov.full_ratio.toFixed(4)],
    ['unresolved measurements', String(cov.unresolved_measurements)],
  ];
  for (const [k, v] of rows) {
    const tr = document.createElement('tr');
    tr.append(text('td', k), text('td', v, 'num'));
    table.append(tr);
  }
  return table;
}

async function renderCoverage(): Promise<void> {
  const report = await offline.track(api.coverage());
  const current = el('coverage-current');
  current.replaceChildren();
  if (report.current) {
    current.append(coverageTable(report.current));
  } else {
    current.append(text('p', 'no run data yet; trigger a re-run', 'empty-state'));
  }
  const runsNode = el('coverage-runs');
  runsNode.replaceChildren();
  for (const run of [...report.runs].reverse()) {
    const div = document.createElement('div');
    div.className = 'run-row';
    const sugg = Object.entries(run.suggestions)
      .map(([k, n]) => `${k}: ${n}`)
      .join(', ');
    div.append(
      text('span', run.id, 'seed'),
      text('span', run.coverage
        ? `full ${run.coverage.full}/${run.coverage.segments}, XXX ${run.coverage.xxx_tokens}`
        : '(open)', 'refs'),
      text('span', sugg || 'no new suggestions', 'members'),
    );
    runsNode.append(div);
  }
  const latest = report.runs[report.runs.length - 1];
  el('run-label').textContent = latest ? latest.id : '';
}

async function rerun(): Promise<void> {
  const button = el<HTMLButtonElement>('rerun-button');
  button.disabled = true;
  button.textContent = 'running...';
  try {
    await offline.track(api.rerun());
    evidence.invalidate();
    await Promise.all([
      renderCoverage(),
      queue.refresh(),
      explore.loadClusterList().then(renderClusterList),
    ]);
  } catch (err) {
    el('coverage-current').prepend(
      text('p', err instanceof Error ? err.message : String(err), 'empty-state'));
  } finally {
    button.disabled = false;
    button.textContent = 're-run pipeline';
  }
}

// -- shell --------------------------------------------------------------------

function renderToasts(): void {
  const node = el('toasts');
  node.replaceChildren();
  queue.toasts.forEach((toast, i) => {
    const div = text('div', toast.text, `toast toast-${toast.tone}`);
    div.addEventListener('click', () => queue.dismissToast(i));
    node.append(div);
  });
}

function showTab(tab: Tab): void {
  activeTab = tab;
  for (const name of ['queue', 'explore', 'coverage'] as const) {
    el(`view-${name}`).classList.toggle('hidden', name !== tab);
    el(`tab-${name}`).classList.toggle('active', name === tab);
  }
  if (tab === 'coverage') void renderCoverage();
  if (tab === 'explore' && !explore.allClusters.length) {
    void offline.track(explore.loadClusterList()).then(renderClusterList);
  }
}

function isField(target: EventTarget | null): boolean {
  return target instanceof HTMLElement
    && ['INPUT', 'TEXTAREA', 'SELECT'].includes(target.tagName);
}

function wire(): void {
  queue.subscribe(() => {
    renderQueue();
    renderToasts();
  });
  offline.subscribe((down) => {
    el('offline-banner').classList.toggle('hidden', !down);
  });

  el('tab-queue').addEventListener('click', () => showTab('queue'));
  el('tab-explore').addEventListener('click', () => showTab('explore'));
  el('tab-coverage').addEventListener('click', () => showTab('coverage'));

  el<HTMLSelectElement>('filter-kind').addEventListener('change', (ev) => {
    const value = (ev.target as HTMLSelectElement).value;
    void offline.track(queue.setFilters({
      kind: (value || undefined) as SuggestionKind | undefined,
    }));
  });
  el<HTMLSelectElement>('filter-status').addEventListener('change', (ev) => {
    const value = (ev.target as HTMLSelectElement).value as SuggestionStatus;
    void offline.track(queue.setFilters({ status: value }));
  });
  let entityTimer: ReturnType<typeof setTimeout> | undefined;
  el<HTMLInputElement>('filter-entity').addEventListener('input', (ev) => {
    const value = (ev.target as HTMLInputElement).value;
    clearTimeout(entityTimer);
    entityTimer = setTimeout(() => {
      void offline.track(queue.setFilters({ entity: value }));
    }, 250);
  });
  el('page-prev').addEventListener('click', () => queue.turnPage(-1));
  el('page-next').addEventListener('click', () => queue.turnPage(1));

  el<HTMLFormElement>('inventory-form').addEventListener('submit', (ev) => {
    ev.preventDefault();
    const entity = el<HTMLInputElement>('inventory-entity').value;
    void offline.track(explore.lookupInventory(entity)).then(renderInventory);
  });
  el<HTMLFormElement>('cluster-form').addEventListener('submit', (ev) => {
    ev.preventDefault();
    const seed = el<HTMLInputElement>('cluster-seed').value;
    const kind = el<HTMLSelectElement>('cluster-kind').value as 'entity' | 'value';
    void offline.track(explore.lookupCluster(seed, kind)).then(renderCluster);
  });

  el('rerun-button').addEventListener('click', () => void rerun());

  document.addEventListener('keydown', (ev) => {
    const action = keyAction({
      key: ev.key,
      ctrlKey: ev.ctrlKey,
      metaKey: ev.metaKey,
      altKey: ev.altKey,
      inField: isField(ev.target),
    });
    if (!action) return;
    ev.preventDefault();
    switch (action) {
      case 'next': queue.move(1); break;
      case 'prev': queue.move(-1); break;
      case 'accept': void queue.decideSelected('ACCEPT'); break;
      case 'reject': void queue.decideSelected('REJECT'); break;
      case 'page-next': queue.turnPage(1); break;
      case 'page-prev': queue.turnPage(-1); break;
      case 'tab-queue': showTab('queue'); break;
      case 'tab-explore': showTab('explore'); break;
      case 'tab-coverage': showTab('coverage'); break;
    }
  });

  // connectivity ping; also recovers the queue after the service comes back
  setInterval(() => {
    void offline.track(api.coverage()).then(
      () => {
        if (activeTab === 'queue' && !queue.items.length) void queue.refresh();
      },
      () => undefined,
    );
  }, 5000);
}

async function boot(): Promise<void> {
  wire();
  try {
    await offline.track(queue.refresh());
    await renderCoverage();
  } catch {
    // offline at startup: banner is up, ping will retry
  }
  renderQueue();
}

void boot();

import { ApiClient, ApiError, OfflineError } from './api.js';
import type { Suggestion, SuggestionKind, SuggestionStatus, Verdict } from './types.js';

export interface QueueFilters {
  kind?: SuggestionKind;
  status: SuggestionStatus;
  entity: string;
}

export interface Toast {
  text: string;
  tone: 'info' | 'conflict' | 'error';
}

const PAGE_SIZE = 20;

// Queue state is a projection of the last /suggestions response plus the
// decisions currently in flight. A decision leaves the list optimistically
// but is only recorded once the server confirms; any failure restores the
// item exactly where it was.
export class QueueStore {
  items: Suggestion[] = [];
  filters: QueueFilters = { status: 'SUGGESTED', entity: '' };
  selected = 0;
  page = 0;
  toasts: Toast[] = [];
  loading = false;
  private pending = new Set<string>();
  private listeners: Array<() => void> = [];

  constructor(
    private api: ApiClient,
    private who = 'reviewer',
    private onOffline?: () => void,
  ) {}

  subscribe(fn: () => void): void {
    this.listeners.push(fn);
  }

  private notify(): void {
    for (const fn of this.listeners) fn();
  }

  private pushToast(text: string, tone: Toast['tone']): void {
    this.toasts.push({ text, tone });
    if (this.toasts.length > 4) this.toasts.shift();
  }

  dismissToast(i: number): void {
    this.toasts.splice(i, 1);
    this.notify();
  }

  async refresh(): Promise<void> {
    this.loading = true;
    this.notify();
    try {
      this.items = await this.api.suggestions({
        kind: this.filters.kind,
        status: this.filters.status,
        entity: this.filters.entity || undefined,
      });
    } finally {
      this.loading = false;
    }
    this.clamp();
    this.notify();
  }

  async setFilters(filters: Partial<QueueFilters>): Promise<void> {
    this.filters = { ...this.filters, ...filters };
    this.page = 0;
    this.selected = 0;
    await this.refresh();
  }

  private clamp(): void {
    const pages = this.pageCount();
    if (this.page >= pages) this.page = Math.max(0, pages - 1);
    const count = this.pageItems().length;
    if (this.selected >= count) this.selected = Math.max(0, count - 1);
  }

  pageCount(): number {
    return Math.max(1, Math.ceil(this.items.length / PAGE_SIZE));
  }

  pageItems(): Suggestion[] {
    const start = this.page * PAGE_SIZE;
    return this.items.slice(start, start + PAGE_SIZE);
  }

  selectedItem(): Suggestion | undefined {
    return this.pageItems()[this.selected];
  }

  move(delta: number): void {
    const count = this.pageItems().length;
    if (!count) return;
    this.selected = Math.min(count - 1, Math.max(0, this.selected + delta));
    this.notify();
  }

  select(index: number): void {
    if (index < 0 || index >= this.pageItems().length) return;
    this.selected = index;
    this.notify();
  }

  turnPage(delta: number): void {
    const next = this.page + delta;
    if (next < 0 || next >= this.pageCount()) return;
    this.page = next;
    this.selected = 0;
    this.notify();
  }

  isPending(id: string): boolean {
    return this.pending.has(id);
  }

  // Optimistic decide of the currently selected item. Returns the verdict's
  // outcome so callers (and tests) can distinguish conflict from success.
  async decideSelected(verdict: Verdict): Promise<'ok' | 'conflict' | 'offline' | 'noop'> {
    const item = this.selectedItem();
    if (!item || this.pending.has(item.id)) return 'noop';
    return this.decide(item, verdict);
  }

  async decide(item: Suggestion, verdict: Verdict): Promise<'ok' | 'conflict' | 'offline'> {
    const index = this.items.indexOf(item);
    this.pending.add(item.id);
    const leavesQueue = this.filters.status === 'SUGGESTED';
    if (leavesQueue && index >= 0) this.items.splice(index, 1);
    this.clamp();
    this.notify();

    try {
      const decided = await this.api.decide(item.id, verdict, this.who);
      // server truth replaces the optimistic guess
      if (!leavesQueue && index >= 0) this.items[index] = decided;
      this.pushToast(`${decided.rendered} -> ${decided.status}`, 'info');
      return 'ok';
    } catch (err) {
      if (leavesQueue && index >= 0) this.items.splice(index, 0, item);
      this.clamp();
      if (err instanceof ApiError && err.status === 409) {
        this.pushToast(`conflict: ${err.detail}`, 'conflict');
        // someone else decided it; fetch the truth
        await this.refresh().catch(() => undefined);
        return 'conflict';
      }
      if (err instanceof OfflineError) {
        this.onOffline?.();
        this.pushToast('decision not saved: service unreachable', 'error');
        return 'offline';
      }
      this.pushToast(err instanceof Error ? err.message : String(err), 'error');
      throw err;
    } finally {
      this.pending.delete(item.id);
      this.notify();
    }
  }
}

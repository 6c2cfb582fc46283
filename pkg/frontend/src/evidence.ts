import { ApiClient } from './api.js';
import type { EvidenceRef, SegmentView } from './types.js';

// Evidence snippets show the triggering segment plus one segment of context
// on each side; the preceding segment matters because generic measurements
// resolve against the entity mentioned there.
export class EvidenceCache {
  private windows = new Map<string, SegmentView[]>();
  private misses = new Set<string>();

  constructor(private api: ApiClient, private context = 1) {}

  private key(ref: EvidenceRef): string {
    return `${ref.doc}:${ref.segment}`;
  }

  cached(ref: EvidenceRef): SegmentView[] | undefined {
    return this.windows.get(this.key(ref));
  }

  async window(ref: EvidenceRef): Promise<SegmentView[]> {
    const key = this.key(ref);
    const hit = this.windows.get(key);
    if (hit) return hit;
    if (this.misses.has(key)) return [];
    try {
      const data = await this.api.segments(ref.doc, ref.segment, this.context);
      this.windows.set(key, data.segments);
      return data.segments;
    } catch (err) {
      // a 404 means the doc changed since the run; remember and show nothing
      this.misses.add(key);
      throw err;
    }
  }

  invalidate(): void {
    this.windows.clear();
    this.misses.clear();
  }
}

// plain-text snippet for list rendering: context dim, focus segment marked
export function snippetText(window: SegmentView[]): string {
  return window
    .map((s) => (s.focus ? `>> ${s.text}` : s.text))
    .join(' ');
}

import type {
  Cluster,
  CoverageReport,
  Inventory,
  RelationRow,
  RerunResult,
  RunInfo,
  SegmentWindow,
  Suggestion,
  SuggestionKind,
  SuggestionStatus,
  Verdict,
} from './types.js';

// HTTP error with the server's detail message attached
export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`${status}: ${detail}`);
    this.name = 'ApiError';
  }
}

// network-level failure (server down, connection refused)
export class OfflineError extends Error {
  constructor(cause: unknown) {
    super('service unreachable');
    this.name = 'OfflineError';
    this.cause = cause;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

function query(params: Record<string, string | number | undefined>): string {
  const pairs = Object.entries(params)
    .filter(([, v]) => v !== undefined && v !== '')
    .map(([k, v]) => `${encodeURIComponent(k)}=${encodeURIComponent(String(v))}`);
  return pairs.length ? `?${pairs.join('&')}` : '';
}

export interface SuggestionFilters {
  kind?: SuggestionKind;
  status?: SuggestionStatus;
  entity?: string;
}

export class ApiClient {
  private fetchImpl: FetchLike;

  constructor(private base = '', fetchImpl?: FetchLike) {
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let resp: Response;
    try {
      resp = await this.fetchImpl(this.base + path, init);
    } catch (err) {
      throw new OfflineError(err);
    }
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = (await resp.json()) as { detail?: unknown };
        if (typeof body.detail === 'string') detail = body.detail;
        else if (body.detail !== undefined) detail = JSON.stringify(body.detail);
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, detail);
    }
    return resp.json() as Promise<T>;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  async suggestions(filters: SuggestionFilters = {}): Promise<Suggestion[]> {
    const q = query({
      kind: filters.kind,
      status: filters.status,
      entity: filters.entity,
    });
    const data = await this.request<{ items: Suggestion[] }>(`/suggestions${q}`);
    return data.items;
  }

  decide(id: string, verdict: Verdict, who = 'reviewer'): Promise<Suggestion> {
    return this.post<Suggestion>(`/suggestions/${id}/decide`, { verdict, who });
  }

  async relations(): Promise<RelationRow[]> {
    const data = await this.request<{ rows: RelationRow[] }>('/relations');
    return data.rows;
  }

  async clusters(): Promise<Cluster[]> {
    const data = await this.request<{ clusters: Cluster[] }>('/clusters');
    return data.clusters;
  }

  cluster(seed: string, kind: 'entity' | 'value' = 'value'): Promise<Cluster> {
    return this.request<Cluster>(`/clusters${query({ seed, kind })}`);
  }

  inventory(entity: string): Promise<Inventory> {
    return this.request<Inventory>(`/inventory${query({ entity })}`);
  }

  async ontology(status?: SuggestionStatus): Promise<Suggestion[]> {
    const data = await this.request<{ items: Suggestion[] }>(
      `/ontology${query({ status })}`);
    return data.items;
  }

  coverage(): Promise<CoverageReport> {
    return this.request<CoverageReport>('/coverage');
  }

  async runs(): Promise<RunInfo[]> {
    const data = await this.request<{ runs: RunInfo[] }>('/runs');
    return data.runs;
  }

  segments(doc: string, index: number, context = 1): Promise<SegmentWindow> {
    return this.request<SegmentWindow>(`/segments${query({ doc, index, context })}`);
  }

  rerun(): Promise<RerunResult> {
    return this.post<RerunResult>('/rerun', {});
  }

  async valueGroups(status: SuggestionStatus = 'ACCEPTED'): Promise<Suggestion[]> {
    const data = await this.request<{ items: Suggestion[] }>(
      `/value-groups${query({ status })}`);
    return data.items;
  }

  createValueGroup(label: string, values: string[], entity = '',
                   who = 'reviewer'): Promise<Suggestion> {
    return this.post<Suggestion>('/value-groups', { label, values, entity, who });
  }
}

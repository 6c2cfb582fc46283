import type { FetchLike } from '../src/api';
import type { Suggestion } from '../src/types';

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

// scripted fetch: route patterns to canned responses, record every call
export interface StubRoute {
  match: (path: string, init?: RequestInit) => boolean;
  respond: (path: string, init?: RequestInit) => Response | Promise<Response>;
}

export function stubFetch(routes: StubRoute[]): FetchLike & { calls: string[] } {
  const calls: string[] = [];
  const impl = async (path: string, init?: RequestInit) => {
    calls.push(`${init?.method ?? 'GET'} ${path}`);
    for (const route of routes) {
      if (route.match(path, init)) return route.respond(path, init);
    }
    throw new Error(`unstubbed request: ${path}`);
  };
  return Object.assign(impl, { calls });
}

export function suggestion(over: Partial<Suggestion> = {}): Suggestion {
  return {
    id: 's000000000001',
    kind: 'LEXICON',
    status: 'SUGGESTED',
    count: 1,
    created_run: 'r0001',
    decided_by: null,
    payload: {
      surface: 'leer', cls: 'ADJ', cas: '_', num: '_', gen: '_',
      origin: 'PARSER_AS',
    },
    rendered: 'leer ADJ _ _ _ (PARSER_AS)',
    evidence: [{ doc: 'befund_01.txt', segment: 0 }],
    ...over,
  };
}

import { afterAll, beforeAll, describe, expect, it } from 'vitest';
import { execFileSync, spawn, type ChildProcess } from 'node:child_process';
import * as fs from 'node:fs';
import * as net from 'node:net';
import * as os from 'node:os';
import * as path from 'node:path';
import { fileURLToPath } from 'node:url';

import { ApiClient } from '../src/api';
import { QueueStore } from '../src/queue';
import type { LexiconPayload, Suggestion } from '../src/types';

// End-to-end review round-trip against a real service instance on a scratch
// copy of the bundled corpus: accept the adjective suggestion the way the
// queue view does, trigger a re-run, and confirm the word is now lexicon-known.

const HERE = path.dirname(fileURLToPath(import.meta.url));
const CORPUS = path.resolve(HERE, '../../data/demo_corpus_ext');

// tags the probe sentence against the reviewed lexicon the service wrote
const TAG_PROBE = `
import sys
from sublex.docmodel import RawCorpusFile, segment_document
from sublex.pipeline import PipelineConfig, load_resources
from sublex.store import KnowledgeStore
from sublex.tagging import CompositeLexicon

config = PipelineConfig.load(sys.argv[1])
resources = load_resources(config)
store = KnowledgeStore(config.store)
lexicon = CompositeLexicon(resources.lexicon, store.lexicon_view())
raw = RawCorpusFile(path="probe.txt", name="probe.txt",
                    text="Kein ungehoeriger Inhalt in der Mundhoehle.")
doc = segment_document(raw, resources.split_exceptions)
for tok in resources.tagger.tag_segment(doc.segments[0], lexicon):
    for r in tok.readings:
        print(tok.token.surface, r.cls.value, r.src.value)
`;

function isLexicon(s: Suggestion): s is Suggestion & { payload: LexiconPayload } {
  return s.kind === 'LEXICON';
}

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const srv = net.createServer();
    srv.listen(0, '127.0.0.1', () => {
      const addr = srv.address();
      if (addr && typeof addr === 'object') srv.close(() => resolve(addr.port));
      else srv.close(() => reject(new Error('could not allocate a port')));
    });
  });
}

async function waitUp(url: string, errors: () => string, timeoutMs = 45_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      const resp = await fetch(url);
      if (resp.ok) return;
    } catch {
      // not listening yet
    }
    if (Date.now() > deadline) {
      throw new Error(`service did not come up at ${url}\n${errors()}`);
    }
    await new Promise((r) => setTimeout(r, 250));
  }
}

let workdir = '';
let proc: ChildProcess | undefined;
let base = '';
let api: ApiClient;

beforeAll(async () => {
  workdir = fs.mkdtempSync(path.join(os.tmpdir(), 'sublex-ui-'));
  fs.cpSync(CORPUS, workdir, { recursive: true });
  const port = await freePort();
  base = `http://127.0.0.1:${port}`;

  let stderr = '';
  proc = spawn('python3', [
    '-m', 'sublex.cli', 'serve',
    '--config', path.join(workdir, 'config.json'),
    '--host', '127.0.0.1', '--port', String(port),
  ], { stdio: ['ignore', 'ignore', 'pipe'] });
  proc.stderr?.on('data', (chunk: Buffer) => { stderr += chunk.toString(); });

  api = new ApiClient(base);
  await waitUp(`${base}/coverage`, () => stderr);
});

afterAll(() => {
  proc?.kill();
  if (workdir) fs.rmSync(workdir, { recursive: true, force: true });
});

describe('review round-trip', () => {
  it('accepting the adjective suggestion updates the lexicon and the re-run uses it', async () => {
    const before = await api.coverage();
    expect(before.current).not.toBeNull();
    const xxxBefore = before.current?.xxx_tokens ?? 0;
    const fullBefore = before.current?.full ?? 0;

    const queue = new QueueStore(api, 'ui-reviewer');
    await queue.refresh();
    const target = queue.items.find((s) =>
      isLexicon(s) && s.payload.surface === 'ungehoeriger' && s.payload.cls === 'ADJ');
    expect(target).toBeDefined();
    if (!target) return;

    const outcome = await queue.decide(target, 'ACCEPT');
    expect(outcome).toBe('ok');
    expect(queue.items.some((s) => s.id === target.id)).toBe(false);
    expect(queue.toasts.at(-1)?.tone).toBe('info');

    // the decision exists server-side, attributed to this reviewer
    const accepted = await api.suggestions({ status: 'ACCEPTED' });
    expect(accepted.find((s) => s.id === target.id)?.decided_by).toBe('ui-reviewer');

    // a re-run triggered the way the coverage view does it
    const rerun = await api.rerun();
    expect(rerun.coverage.xxx_tokens).toBeLessThan(xxxBefore);
    expect(rerun.coverage.full).toBeGreaterThanOrEqual(fullBefore);

    // the word is lexicon-known now: no fresh suggestion for it
    const fresh = await api.suggestions({ status: 'SUGGESTED' });
    expect(fresh.filter((s) => isLexicon(s) && s.payload.surface === 'ungehoeriger'))
      .toHaveLength(0);

    // and tagging the sentence against the reviewed lexicon reads src=LEXICON
    const out = execFileSync('python3',
      ['-c', TAG_PROBE, path.join(workdir, 'config.json')], { encoding: 'utf-8' });
    expect(out).toContain('ungehoeriger ADJ LEXICON');
  });

  it('two tabs deciding the same item see one success and one conflict', async () => {
    const tabA = new QueueStore(api, 'tab-a');
    const tabB = new QueueStore(new ApiClient(base), 'tab-b');
    await Promise.all([tabA.refresh(), tabB.refresh()]);

    const itemA = tabA.items[0];
    expect(itemA).toBeDefined();
    if (!itemA) return;
    const itemB = tabB.items.find((s) => s.id === itemA.id);
    expect(itemB).toBeDefined();
    if (!itemB) return;

    const [ra, rb] = await Promise.all([
      tabA.decide(itemA, 'ACCEPT'),
      tabB.decide(itemB, 'REJECT'),
    ]);
    expect([ra, rb].sort()).toEqual(['conflict', 'ok']);

    // the losing tab surfaced the conflict and refreshed to server truth
    const loser = ra === 'conflict' ? tabA : tabB;
    expect(loser.toasts.some((t) => t.tone === 'conflict')).toBe(true);
    expect(loser.items.some((s) => s.id === itemA.id)).toBe(false);

    // exactly one decision stands
    const accepted = await api.suggestions({ status: 'ACCEPTED' });
    const rejected = await api.suggestions({ status: 'REJECTED' });
    const hits = [...accepted, ...rejected].filter((s) => s.id === itemA.id);
    expect(hits).toHaveLength(1);
    expect(['tab-a', 'tab-b']).toContain(hits[0]?.decided_by);
  });
});

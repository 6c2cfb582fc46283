// Shapes returned by the review service. Field names mirror the JSON
// exactly; the UI never invents state the server cannot reproduce.

export type SuggestionKind = 'LEXICON' | 'ONTOLOGY' | 'VALUE_GROUP';
export type SuggestionStatus = 'SUGGESTED' | 'ACCEPTED' | 'REJECTED';
export type Verdict = 'ACCEPT' | 'REJECT';

export interface EvidenceRef {
  doc: string;
  segment: number;
}

export interface LexiconPayload {
  surface: string;
  cls: string;
  cas: string;
  num: string;
  gen: string;
  origin: string;
  lemma?: string;
}

export interface OntologyPayload {
  fact: string;
  subject: string;
  object: string;
  note: string;
  range?: [number, number, string];
}

export interface ValueGroupPayload {
  label: string;
  values: string[];
  entity: string;
}

export type SuggestionPayload = LexiconPayload | OntologyPayload | ValueGroupPayload;

export interface Suggestion {
  id: string;
  kind: SuggestionKind;
  status: SuggestionStatus;
  count: number;
  created_run: string;
  decided_by: string | null;
  payload: SuggestionPayload;
  rendered: string;
  evidence: EvidenceRef[];
}

export interface ValueCount {
  value: string;
  count: number;
}

export interface RelationRow {
  entity: string;
  values: ValueCount[];
  evidence: EvidenceRef[];
}

export interface Cluster {
  seed: string;
  kind: 'entity' | 'value';
  rounds: number;
  entities: string[];
  values: string[];
}

export interface Inventory {
  entity: string;
  values: ValueCount[];
}

export interface SegmentView {
  index: number;
  label: string | null;
  kind: string;
  text: string;
  focus: boolean;
}

export interface SegmentWindow {
  doc: string;
  segments: SegmentView[];
}

export interface Coverage {
  segments: number;
  full: number;
  partial: number;
  unparsed: number;
  matched: number;
  unmatched: number;
  xxx_tokens: number;
  full_ratio: number;
  unresolved_measurements: number;
}

export interface CoverageReport {
  current: Coverage | null;
  runs: { id: string; coverage: Coverage | null; closed: boolean;
          suggestions: Record<string, number> }[];
}

export interface RunInfo {
  id: string;
  corpus: string;
  config: string;
  opened_at: string;
  closed_at: string | null;
  coverage: Coverage | null;
  suggestions: Record<string, number>;
}

export interface RerunResult {
  run_id: string;
  coverage: Coverage;
}

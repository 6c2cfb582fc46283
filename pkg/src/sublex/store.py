"""Append-only knowledge store: suggestions, decisions, runs.

One JSONL file per store. The first line is a version header, every later
line one event (run_open, suggest, merge, decide, run_close). Store state is
a pure replay of that event sequence, which keeps audit, crash recovery and
the replay-equality tests honest. Writes are serialized by a single lock;
readers get immutable snapshots.

Suggestion ids are content hashes of the canonical payload, so identical
payloads collapse into one suggestion (their evidence is merged) and ids are
stable across runs. A payload that was rejected once is remembered and never
re-suggested. Lexicon payload identity ignores the origin marker: the same
entry found by two different routes is still one review item.
"""

from __future__ import annotations

import enum
import hashlib
import json
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .features import FeatureBundle, parse_bundle
from .ontology import FactKind, OntologyFact
from .relations import Evidence
from .tagging import POSClass, POSReading, Source, _decap

STORE_FORMAT = "sublex-store"
STORE_VERSION = 1


class StoreError(Exception):
    pass


class UnknownId(StoreError):
    pass


class AlreadyDecided(StoreError):
    pass


class RunClosed(StoreError):
    pass


class UnknownRun(StoreError):
    pass


class SuggestionKind(str, enum.Enum):
    LEXICON = "LEXICON"
    ONTOLOGY = "ONTOLOGY"
    VALUE_GROUP = "VALUE_GROUP"


class Status(str, enum.Enum):
    SUGGESTED = "SUGGESTED"
    ACCEPTED = "ACCEPTED"
    REJECTED = "REJECTED"


class EntryOrigin(str, enum.Enum):
    HEURISTIC = "HEURISTIC"
    PARSER_AS = "PARSER_AS"
    FEATURE_DERIVATION = "FEATURE_DERIVATION"
    MANUAL = "MANUAL"


@dataclass(frozen=True)
class LexiconEntry:
    surface: str
    cls: POSClass
    features: FeatureBundle
    lemma: str | None = None
    origin: EntryOrigin = EntryOrigin.MANUAL

    def reading(self) -> POSReading:
        return POSReading(cls=self.cls, features=self.features,
                          src=Source.LEXICON, lemma=self.lemma)


@dataclass(frozen=True)
class ValueGroup:
    """Reviewer-authored grouping of related values (antonyms, scale steps,
    modifier families); the system never infers these."""

    label: str
    values: tuple[str, ...]
    entity: str = ""


@dataclass
class Suggestion:
    id: str
    kind: SuggestionKind
    payload: object
    created_run: str
    status: Status = Status.SUGGESTED
    decided_by: str | None = None
    decided_at: str | None = None
    evidence: list[Evidence] = field(default_factory=list)
    count: int = 1
    # replay position of the deciding event; None while SUGGESTED
    decided_seq: int | None = field(default=None, repr=False)


@dataclass
class RunRecord:
    id: str
    corpus_hash: str
    config_hash: str
    opened_at: str
    opened_seq: int
    closed_at: str | None = None
    coverage: dict | None = None
    suggestion_counts: dict = field(default_factory=dict)

    @property
    def closed(self) -> bool:
        return self.closed_at is not None


# -- payload (de)serialization -------------------------------------------------

def _bundle_jsonable(features: FeatureBundle) -> dict:
    return {c: features.format_component(c) for c in ("cas", "num", "gen")}


def payload_to_jsonable(kind: SuggestionKind, payload) -> dict:
    if kind is SuggestionKind.LEXICON:
        d = {"surface": payload.surface, "cls": payload.cls.value,
             "origin": payload.origin.value}
        d.update(_bundle_jsonable(payload.features))
        if payload.lemma:
            d["lemma"] = payload.lemma
        return d
    if kind is SuggestionKind.ONTOLOGY:
        d = {"fact": payload.kind.value, "subject": payload.subject,
             "object": payload.object, "note": payload.note}
        if payload.payload is not None:
            lo, hi, unit = payload.payload
            d["range"] = [lo, hi, unit]
        return d
    if kind is SuggestionKind.VALUE_GROUP:
        return {"label": payload.label, "values": list(payload.values),
                "entity": payload.entity}
    raise StoreError("unknown kind %r" % kind)


def payload_from_jsonable(kind: SuggestionKind, d: dict):
    if kind is SuggestionKind.LEXICON:
        return LexiconEntry(
            surface=d["surface"],
            cls=POSClass(d["cls"]),
            features=parse_bundle(d["cas"], d["num"], d["gen"]),
            lemma=d.get("lemma"),
            origin=EntryOrigin(d["origin"]),
        )
    if kind is SuggestionKind.ONTOLOGY:
        rng = d.get("range")
        return OntologyFact(
            kind=FactKind(d["fact"]),
            subject=d["subject"],
            object=d["object"],
            payload=(rng[0], rng[1], rng[2]) if rng else None,
            note=d.get("note", ""),
        )
    if kind is SuggestionKind.VALUE_GROUP:
        return ValueGroup(label=d["label"], values=tuple(d["values"]),
                          entity=d.get("entity", ""))
    raise StoreError("unknown kind %r" % kind)


def payload_key(kind: SuggestionKind, payload) -> str:
    """Canonical identity for dedup. Drops the lexicon origin marker: the
    same entry found by two routes is one review item. The ontology note
    stays, it distinguishes e.g. two localisation triggers for one pair."""
    d = payload_to_jsonable(kind, payload)
    d.pop("origin", None)
    return kind.value + ":" + json.dumps(d, sort_keys=True, ensure_ascii=False)


def suggestion_id(key: str) -> str:
    return "s" + hashlib.sha1(key.encode("utf-8")).hexdigest()[:12]


def payload_entity(kind: SuggestionKind, payload) -> str:
    if kind is SuggestionKind.LEXICON:
        return payload.surface
    if kind is SuggestionKind.ONTOLOGY:
        return payload.subject
    return payload.entity or payload.label


# -- lexicon view ---------------------------------------------------------------

class LexiconView:
    """Immutable snapshot of accepted lexicon entries; same lookup contract
    as the text lexicon (exact surface first, then decapitalized)."""

    def __init__(self, entries: tuple[LexiconEntry, ...]):
        self.entries = entries
        self._map: dict[str, tuple[POSReading, ...]] = {}
        for entry in entries:
            prior = self._map.get(entry.surface, ())
            reading = entry.reading()
            if reading not in prior:
                self._map[entry.surface] = prior + (reading,)

    def lookup(self, surface: str) -> list[POSReading]:
        hit = self._map.get(surface)
        if hit:
            return list(hit)
        alt = _decap(surface)
        if alt:
            return list(self._map.get(alt, ()))
        return []


# -- the store -------------------------------------------------------------------

def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _evidence_refs(evidence) -> list[dict]:
    return [{"doc": e.doc, "segment": e.segment} for e in evidence]


class KnowledgeStore:
    def __init__(self, path: str | Path, clock=None):
        self.path = Path(path)
        self._clock = clock or _now
        self._lock = threading.Lock()
        self._events: list[dict] = []
        self._suggestions: dict[str, Suggestion] = {}
        self._by_key: dict[str, str] = {}
        self._runs: dict[str, RunRecord] = {}
        self._seq = 0
        if self.path.exists() and self.path.stat().st_size > 0:
            self._load()
        else:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            header = {"t": "header", "format": STORE_FORMAT, "version": STORE_VERSION}
            self.path.write_text(json.dumps(header, sort_keys=True) + "\n",
                                 encoding="utf-8")

    # - log plumbing -

    def _load(self):
        lines = self.path.read_text(encoding="utf-8").splitlines()
        head = json.loads(lines[0])
        if head.get("format") != STORE_FORMAT:
            raise StoreError("not a store file: %s" % self.path)
        if head.get("version") != STORE_VERSION:
            raise StoreError("unsupported store version %r" % head.get("version"))
        for line in lines[1:]:
            if line.strip():
                self._apply(json.loads(line))

    def _apply(self, rec: dict):
        """Mutate memory state by one event; the only state-changing code."""
        t = rec["t"]
        if t == "run_open":
            self._runs[rec["run"]] = RunRecord(
                id=rec["run"], corpus_hash=rec["corpus"], config_hash=rec["config"],
                opened_at=rec["ts"], opened_seq=self._seq,
            )
        elif t == "run_close":
            run = self._runs[rec["run"]]
            run.closed_at = rec["ts"]
            run.coverage = rec["coverage"]
            run.suggestion_counts = rec["counts"]
        elif t == "suggest":
            kind = SuggestionKind(rec["kind"])
            payload = payload_from_jsonable(kind, rec["payload"])
            sugg = Suggestion(
                id=rec["id"], kind=kind, payload=payload,
                created_run=rec["run"], count=rec.get("count", 1),
            )
            for e in rec["evidence"]:
                ref = Evidence(doc=e["doc"], segment=e["segment"])
                if ref not in sugg.evidence:
                    sugg.evidence.append(ref)
            self._suggestions[sugg.id] = sugg
            self._by_key[payload_key(kind, payload)] = sugg.id
        elif t == "merge":
            sugg = self._suggestions[rec["id"]]
            for e in rec["evidence"]:
                ref = Evidence(doc=e["doc"], segment=e["segment"])
                if ref not in sugg.evidence:
                    sugg.evidence.append(ref)
            sugg.count += rec.get("count", 1)
        elif t == "decide":
            sugg = self._suggestions[rec["id"]]
            sugg.status = Status.ACCEPTED if rec["verdict"] == "ACCEPT" else Status.REJECTED
            sugg.decided_by = rec["who"]
            sugg.decided_at = rec["ts"]
            sugg.decided_seq = self._seq
        else:
            raise StoreError("unknown log record type %r" % t)
        self._events.append(rec)
        self._seq += 1

    def _log(self, rec: dict):
        self._apply(rec)
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(rec, sort_keys=True, ensure_ascii=False) + "\n")

    # - runs -

    def open_run(self, corpus_hash: str, config_hash: str) -> str:
        with self._lock:
            run_id = "r%04d" % (len(self._runs) + 1)
            self._log({"t": "run_open", "run": run_id, "corpus": corpus_hash,
                       "config": config_hash, "ts": self._clock()})
            return run_id

    def close_run(self, run_id: str, coverage: dict) -> RunRecord:
        with self._lock:
            run = self._runs.get(run_id)
            if run is None:
                raise UnknownRun(run_id)
            if run.closed:
                raise RunClosed(run_id)
            counts: dict[str, int] = {}
            for sugg in self._suggestions.values():
                if sugg.created_run == run_id:
                    counts[sugg.kind.value] = counts.get(sugg.kind.value, 0) + 1
            self._log({"t": "run_close", "run": run_id, "coverage": coverage,
                       "counts": counts, "ts": self._clock()})
            return run

    def runs(self) -> list[RunRecord]:
        return list(self._runs.values())

    def latest_run(self) -> RunRecord | None:
        records = self.runs()
        return records[-1] if records else None

    # - suggestions -

    def record_suggestions(self, run_id: str, items: list) -> list[str]:
        """items: (kind, payload, evidence list) triples. Returns ids of the
        newly created suggestions only; a duplicate payload merges evidence
        into the existing undecided suggestion, decided ones are left alone
        (in particular: rejected payloads stay rejected)."""
        with self._lock:
            run = self._runs.get(run_id)
            if run is None:
                raise UnknownRun(run_id)
            if run.closed:
                raise RunClosed(run_id)
            new_ids = []
            for kind, payload, evidence in items:
                kind = SuggestionKind(kind)
                key = payload_key(kind, payload)
                existing_id = self._by_key.get(key)
                if existing_id is None:
                    sid = suggestion_id(key)
                    while sid in self._suggestions:  # hash-prefix collision guard
                        sid += "x"
                    self._log({
                        "t": "suggest", "id": sid, "run": run_id,
                        "kind": kind.value,
                        "payload": payload_to_jsonable(kind, payload),
                        "evidence": _evidence_refs(evidence), "ts": self._clock(),
                    })
                    new_ids.append(sid)
                else:
                    existing = self._suggestions[existing_id]
                    if existing.status is Status.SUGGESTED:
                        self._log({"t": "merge", "id": existing_id, "run": run_id,
                                   "evidence": _evidence_refs(evidence), "count": 1})
            return new_ids

    def decide(self, sid: str, verdict: str, who: str) -> Suggestion:
        verdict = verdict.upper()
        if verdict not in ("ACCEPT", "REJECT"):
            raise StoreError("verdict must be ACCEPT or REJECT, got %r" % verdict)
        with self._lock:
            sugg = self._suggestions.get(sid)
            if sugg is None:
                raise UnknownId(sid)
            if sugg.status is not Status.SUGGESTED:
                raise AlreadyDecided("%s is already %s" % (sid, sugg.status.value))
            self._log({"t": "decide", "id": sid, "verdict": verdict,
                       "who": who, "ts": self._clock()})
            return sugg

    def get(self, sid: str) -> Suggestion:
        sugg = self._suggestions.get(sid)
        if sugg is None:
            raise UnknownId(sid)
        return sugg

    def find(self, kind, payload) -> Suggestion | None:
        """The suggestion a payload would deduplicate against, if any."""
        sid = self._by_key.get(payload_key(SuggestionKind(kind), payload))
        return self._suggestions.get(sid) if sid else None

    def suggestions(self, kind: str | None = None, status: str | None = None,
                    entity: str | None = None) -> list[Suggestion]:
        out = []
        for sugg in self._suggestions.values():
            if kind is not None and sugg.kind.value != kind:
                continue
            if status is not None and sugg.status.value != status:
                continue
            if entity is not None:
                subject = payload_entity(sugg.kind, sugg.payload)
                if entity.lower() not in subject.lower():
                    continue
            out.append(sugg)
        return out

    # - views -

    def lexicon_view(self, as_of: str = "latest") -> LexiconView:
        """Accepted lexicon entries as the tagger saw them when the given
        run opened (or right now, for "latest")."""
        if as_of == "latest":
            boundary = self._seq
        else:
            run = self._runs.get(as_of)
            if run is None:
                raise UnknownRun(as_of)
            boundary = run.opened_seq
        entries = []
        for sugg in self._suggestions.values():
            if sugg.kind is not SuggestionKind.LEXICON:
                continue
            if sugg.status is not Status.ACCEPTED:
                continue
            if sugg.decided_seq is None or sugg.decided_seq >= boundary:
                continue
            entries.append(sugg.payload)
        return LexiconView(tuple(entries))

    def accepted_ontology(self) -> list[Suggestion]:
        return self.suggestions(kind="ONTOLOGY", status="ACCEPTED")

    def value_groups(self, status: str | None = "ACCEPTED") -> list[Suggestion]:
        return self.suggestions(kind="VALUE_GROUP", status=status)

    def add_value_group(self, label: str, values: list[str], entity: str,
                        who: str, run_id: str = "") -> Suggestion:
        """Reviewer-authored annotation: recorded as a suggestion and
        accepted in the same breath, so the audit trail stays uniform."""
        group = ValueGroup(label=label, values=tuple(values), entity=entity)
        key = payload_key(SuggestionKind.VALUE_GROUP, group)
        with self._lock:
            existing_id = self._by_key.get(key)
            if existing_id is not None:
                return self._suggestions[existing_id]
            sid = suggestion_id(key)
            while sid in self._suggestions:
                sid += "x"
            self._log({
                "t": "suggest", "id": sid, "run": run_id, "kind": "VALUE_GROUP",
                "payload": payload_to_jsonable(SuggestionKind.VALUE_GROUP, group),
                "evidence": [], "ts": self._clock(),
            })
            self._log({"t": "decide", "id": sid, "verdict": "ACCEPT",
                       "who": who, "ts": self._clock()})
            return self._suggestions[sid]

    # - maintenance -

    def compact(self):
        """Fold merge events into their suggest events and rewrite the log.
        Relative order of the remaining events is unchanged, so every
        position-dependent view (lexicon_view as_of a run) is preserved."""
        with self._lock:
            folded: list[dict] = []
            by_id: dict[str, dict] = {}
            for rec in self._events:
                if rec["t"] == "suggest":
                    rec = dict(rec)
                    rec["evidence"] = list(rec["evidence"])
                    by_id[rec["id"]] = rec
                    folded.append(rec)
                elif rec["t"] == "merge":
                    target = by_id[rec["id"]]
                    for ref in rec["evidence"]:
                        if ref not in target["evidence"]:
                            target["evidence"].append(ref)
                    target["count"] = target.get("count", 1) + rec.get("count", 1)
                else:
                    folded.append(rec)
            header = {"t": "header", "format": STORE_FORMAT, "version": STORE_VERSION}
            text = "".join(json.dumps(r, sort_keys=True, ensure_ascii=False) + "\n"
                           for r in [header] + folded)
            self.path.write_text(text, encoding="utf-8")
            self._events = []
            self._suggestions = {}
            self._by_key = {}
            self._runs = {}
            self._seq = 0
            self._load()

"""Whole-corpus batch runs: segment, tag, parse, extract, cluster, suggest.

One run is deterministic in its inputs (corpus files, resource files,
accepted lexicon state); artifacts carry no timestamps or run ids, so
re-running with identical inputs rewrites identical bytes. Suggestions are
harvested only from segments with a full parse: assumed word classes (AS),
heuristic readings whose features the parse narrowed, and feature
refinements of known entries. Only number and gender are persisted into
suggested lexicon entries; case is a property of the occurrence.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .cooccurrence import CoocMatrix, property_inventory, zigzag_closure
from .docmodel import load_corpus, segment_document
from .features import FULL_BUNDLE, FeatureBundle
from .grammar import Grammar, GrammarError, load_grammar
from .measurements import (
    FocusRegister,
    FocusUnresolved,
    MeasureTable,
    MeasurementOrigin,
    NotAMeasurement,
)
from .measurements import extract_measurement
from .ontology import (
    DimensionTable,
    classify_concept,
    concept_facts,
    detect_concepts,
    infer_partof,
    load_locatives,
    load_upper_ontology,
    range_facts,
    suggest_isa,
)
from .parser import ChartParser
from .relations import (
    Evidence,
    PatternError,
    aggregate,
    load_exceptions,
    load_patterns,
    match_patterns,
)
from .store import EntryOrigin, KnowledgeStore, LexiconEntry, SuggestionKind
from .tagging import (
    HEURISTIC_SOURCES,
    CompositeLexicon,
    HeuristicConfig,
    POSClass,
    Source,
    Tagger,
    TextLexicon,
    count_unknown_tokens,
)
from .xmlio import (
    DocumentAnalysis,
    SegmentAnalysis,
    export_clusters_xml,
    export_document_xml,
    export_inventories_xml,
    export_ontology_xml,
    export_relations_tsv,
    export_relations_xml,
)

logger = logging.getLogger(__name__)

STAGES = ("segment", "tag", "parse", "extract", "cluster", "suggest")

RESOURCE_PREFIX = "resources:"
_BUNDLED_DIR = Path(__file__).parent / "resources"

_HEURISTIC_SRC = frozenset(s.value for s in HEURISTIC_SOURCES)
_PERSISTED = ("num", "gen")  # cas is contextual, never stored


class ConfigError(ValueError):
    """Unusable pipeline configuration; message names file (and line)."""


class StageError(ValueError):
    """Unknown stage name passed to run_pipeline."""


class StageFailure(RuntimeError):
    """A pipeline stage blew up; message carries stage and location."""

    def __init__(self, stage: str, where: str, cause: Exception):
        super().__init__("stage %s failed at %s: %s" % (stage, where, cause))
        self.stage = stage


_CONFIG_PATHS = (
    "corpus", "grammar", "patterns", "exceptions", "heuristics", "dimensions",
    "measures", "locatives", "upper_ontology", "closed_class",
    "split_exceptions", "lexicon", "store",
)
_CONFIG_INTS = ("min_count", "cluster_cap")


@dataclass(frozen=True)
class PipelineConfig:
    path: Path
    corpus: Path
    grammar: Path
    patterns: Path
    exceptions: Path
    heuristics: Path
    dimensions: Path
    measures: Path
    locatives: Path
    upper_ontology: Path
    closed_class: Path
    split_exceptions: Path
    store: Path
    lexicon: Path | None = None
    min_count: int = 1
    cluster_cap: int = 25

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError("config file not found: %s" % path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError("%s line %d: %s" % (path, exc.lineno, exc.msg)) from exc
        if not isinstance(data, dict):
            raise ConfigError("%s: top level must be an object" % path)
        unknown = set(data) - set(_CONFIG_PATHS) - set(_CONFIG_INTS)
        if unknown:
            raise ConfigError("%s: unknown keys: %s" % (path, ", ".join(sorted(unknown))))

        base = path.parent
        fields: dict = {"path": path}

        def resolve(key, default=None, required=True):
            raw = data.get(key, default)
            if raw is None:
                if required:
                    raise ConfigError("%s: missing required key %r" % (path, key))
                return None
            if not isinstance(raw, str):
                raise ConfigError("%s: key %r must be a path string" % (path, key))
            if raw.startswith(RESOURCE_PREFIX):
                return _BUNDLED_DIR / raw[len(RESOURCE_PREFIX):]
            return (base / raw).resolve()

        fields["corpus"] = resolve("corpus")
        for key, default in (
            ("grammar", "resources:default.grammar"),
            ("patterns", "resources:patterns.txt"),
            ("exceptions", "resources:exceptions.txt"),
            ("heuristics", "resources:heuristics.txt"),
            ("dimensions", "resources:dimensions.txt"),
            ("measures", "resources:measures.txt"),
            ("locatives", "resources:locatives.txt"),
            ("upper_ontology", "resources:upper_ontology.txt"),
            ("closed_class", "resources:closed_class.txt"),
            ("split_exceptions", "resources:abbreviations.txt"),
        ):
            fields[key] = resolve(key, default)
        fields["lexicon"] = resolve("lexicon", required=False)
        fields["store"] = resolve("store", "store.jsonl")

        for key in _CONFIG_INTS:
            value = data.get(key, 1 if key == "min_count" else 25)
            if not isinstance(value, int) or value < 1:
                raise ConfigError("%s: key %r must be a positive integer" % (path, key))
            fields[key] = value

        cfg = cls(**fields)
        missing = [
            "%s (%s)" % (key, getattr(cfg, key))
            for key in _CONFIG_PATHS
            if key != "store"
            and getattr(cfg, key) is not None
            and not Path(getattr(cfg, key)).exists()
        ]
        if missing:
            raise ConfigError("%s: missing referenced files: %s" % (path, "; ".join(missing)))
        return cfg


@dataclass
class Resources:
    """Parsed resource files; everything a run needs besides the corpus."""

    grammar: Grammar
    patterns: list
    exceptions: dict
    tagger: Tagger
    lexicon: TextLexicon | None
    dimensions: DimensionTable
    measures: MeasureTable
    locatives: frozenset
    upper: list[str]
    split_exceptions: tuple


def _parse_split_exceptions(path: Path) -> tuple:
    out = []
    for rawline in path.read_text(encoding="utf-8").splitlines():
        line = rawline.split("#", 1)[0].strip()
        if line:
            out.append(line)
    return tuple(out)


def load_resources(config: PipelineConfig) -> Resources:
    """Parse every configured resource eagerly; any defect fails the run
    before the corpus is touched, naming the offending file."""

    def guarded(loader, path, *args):
        try:
            return loader(path, *args)
        except (GrammarError, PatternError, ValueError) as exc:
            raise ConfigError("%s: %s" % (path, exc)) from exc

    grammar = guarded(load_grammar, config.grammar)
    patterns = guarded(load_patterns, config.patterns)
    exceptions = guarded(load_exceptions, config.exceptions)
    closed = guarded(TextLexicon.from_path, config.closed_class, Source.CLOSED)
    heuristics = guarded(
        lambda p: HeuristicConfig.parse(Path(p).read_text(encoding="utf-8")),
        config.heuristics,
    )
    lexicon = None
    if config.lexicon is not None:
        lexicon = guarded(TextLexicon.from_path, config.lexicon, Source.LEXICON)
    return Resources(
        grammar=grammar,
        patterns=patterns,
        exceptions=exceptions,
        tagger=Tagger(closed, heuristics),
        lexicon=lexicon,
        dimensions=guarded(DimensionTable.from_path, config.dimensions),
        measures=guarded(MeasureTable.from_path, config.measures),
        locatives=guarded(load_locatives, config.locatives),
        upper=guarded(load_upper_ontology, config.upper_ontology),
        split_exceptions=guarded(_parse_split_exceptions, config.split_exceptions),
    )


def corpus_hash(raw_files) -> str:
    h = hashlib.sha1()
    for raw in raw_files:
        h.update(raw.name.encode("utf-8"))
        h.update(b"\x00")
        h.update(raw.text.encode("utf-8"))
        h.update(b"\x00")
    return h.hexdigest()[:16]


def config_hash(config: PipelineConfig) -> str:
    h = hashlib.sha1()
    for key in _CONFIG_PATHS:
        if key in ("corpus", "store"):
            continue
        path = getattr(config, key)
        h.update(key.encode("utf-8"))
        h.update(b"\x00")
        if path is not None:
            h.update(Path(path).read_bytes())
        h.update(b"\x00")
    h.update(("%d/%d" % (config.min_count, config.cluster_cap)).encode("utf-8"))
    return h.hexdigest()[:16]


@dataclass
class RunResult:
    run_id: str
    coverage: dict
    analyses: list[DocumentAnalysis]
    table: object = None
    matrix: CoocMatrix | None = None
    clusters: list = field(default_factory=list)
    inventories: list = field(default_factory=list)
    concepts: list = field(default_factory=list)
    ontology_rows: list = field(default_factory=list)
    measurements: list = field(default_factory=list)
    new_suggestions: list = field(default_factory=list)
    written: list = field(default_factory=list)


def _persisted_bundle(features: FeatureBundle) -> FeatureBundle:
    out = FULL_BUNDLE
    for comp in _PERSISTED:
        out = out.replace(comp, features.get(comp))
    return out


def _reading_src(tagged_token, leaf) -> Source | None:
    """The tagger source of the reading a parse leaf was built from."""
    for reading in tagged_token.readings:
        if reading.cls.value == leaf.reading_cls and (
            leaf.original is None or reading.features == leaf.original
        ):
            return reading.src
    return None


def harvest_lexicon_items(analysis: DocumentAnalysis) -> list[tuple]:
    """(kind, payload, evidence) triples from every fully parsed segment.

    A leaf yields an entry when the parse either assumed its class (AS),
    confirmed a heuristic reading, or narrowed a known entry's fully open
    number/gender; duplicates collapse in the store.
    """
    items = []
    for seg in analysis.segments:
        if seg.parse is None or not seg.parse.is_full or seg.tagged is None:
            continue
        evidence = Evidence(doc=analysis.doc.source, segment=seg.segment.index)
        for tree in seg.parse.trees:
            for leaf in tree.leaves():
                cls_name = leaf.assumed or leaf.reading_cls
                if cls_name in (POSClass.NUMBERTOK.value, POSClass.PUNCT.value,
                                POSClass.XXX.value):
                    continue
                if leaf.assumed:
                    origin = EntryOrigin.PARSER_AS
                elif leaf.src in _HEURISTIC_SRC:
                    origin = EntryOrigin.HEURISTIC
                else:
                    src = _reading_src(seg.tagged[leaf.token_index], leaf)
                    if src is not Source.LEXICON or leaf.original is None:
                        continue
                    narrowed = [
                        c for c in _PERSISTED
                        if leaf.original.is_full(c) and not leaf.features.is_full(c)
                    ]
                    if not narrowed:
                        continue
                    origin = EntryOrigin.FEATURE_DERIVATION
                entry = LexiconEntry(
                    surface=leaf.surface,
                    cls=POSClass(cls_name),
                    features=_persisted_bundle(leaf.features),
                    origin=origin,
                )
                items.append((SuggestionKind.LEXICON, entry, [evidence]))
    return items


def _representative_clusters(matrix: CoocMatrix, cap: int) -> list:
    """One zig-zag closure per connected component, seeded by each value in
    first-occurrence order, capped."""
    clusters = []
    seen = set()
    for value in matrix.value_entities:
        cluster = zigzag_closure(matrix, value, seed_kind="value")
        key = (frozenset(cluster.entities), frozenset(cluster.values))
        if key in seen:
            continue
        seen.add(key)
        clusters.append(cluster)
        if len(clusters) >= cap:
            break
    return clusters


def _build_ontology(result: RunResult, resources: Resources) -> list[tuple]:
    """(fact, evidence) pairs in a stable order: named concepts, property
    dimensions, part-of, is-a, value ranges."""
    matched = []
    forests = []
    for analysis in result.analyses:
        for seg in analysis.segments:
            evidence = Evidence(doc=analysis.doc.source, segment=seg.segment.index)
            if seg.extraction is not None:
                for emission in seg.extraction.emissions:
                    if emission.entity_node is not None:
                        matched.append((emission, evidence))
            if seg.parse is not None and seg.parse.is_full:
                for tree in seg.parse.trees:
                    forests.append((tree, evidence))

    result.concepts = detect_concepts(matched, forests)
    pairs: list[tuple] = []
    for fact in concept_facts(result.concepts):
        pairs.append((fact, list(fact.evidence)))
    for entity, inventory in result.inventories:
        classification = classify_concept(
            entity, inventory, resources.dimensions, min_values=1
        )
        row_evidence = result.table.rows[entity].evidence
        for fact in classification.facts:
            pairs.append((fact, list(row_evidence)))
    for fact in infer_partof(forests, resources.locatives):
        pairs.append((fact, list(fact.evidence)))
    for fact in suggest_isa(result.measurements, resources.upper):
        pairs.append((fact, [m.evidence for m in result.measurements
                             if m.entity == fact.subject]))
    for fact in range_facts(result.measurements):
        pairs.append((fact, list(fact.evidence)))
    return pairs


def run_pipeline(
    config: PipelineConfig,
    store: KnowledgeStore,
    out_dir: str | Path | None = None,
    until: str = "suggest",
) -> RunResult:
    if until not in STAGES:
        raise StageError("unknown stage %r (one of %s)" % (until, ", ".join(STAGES)))
    depth = STAGES.index(until)

    def stage(name: str) -> bool:
        return depth >= STAGES.index(name)

    resources = load_resources(config)
    raw_files = load_corpus(config.corpus)
    run_id = store.open_run(corpus_hash(raw_files), config_hash(config))
    logger.info("run %s over %d files", run_id, len(raw_files))

    rule_types = {
        r.name: r.node_type for r in resources.grammar.rules if r.node_type
    }
    analyses = []
    for raw in raw_files:
        doc = segment_document(raw, resources.split_exceptions)
        analyses.append(DocumentAnalysis(
            doc=doc,
            segments=[SegmentAnalysis(segment=s) for s in doc.segments],
            rule_types=rule_types,
        ))
    result = RunResult(run_id=run_id, coverage={}, analyses=analyses)

    lexicon = CompositeLexicon(resources.lexicon, store.lexicon_view())
    parser = ChartParser(resources.grammar)
    n_segments = 0
    n_full = 0
    n_partial = 0
    n_matched = 0
    unresolved = 0
    all_tagged = []

    for analysis in analyses:
        focus = FocusRegister()
        for seg in analysis.segments:
            n_segments += 1
            where = "%s segment %d" % (analysis.doc.source, seg.segment.index)
            if not stage("tag"):
                continue
            try:
                seg.tagged = resources.tagger.tag_segment(seg.segment, lexicon)
            except Exception as exc:
                raise StageFailure("tag", where, exc) from exc
            all_tagged.append(seg.tagged)
            if not stage("parse"):
                continue
            try:
                seg.parse = parser.parse(seg.tagged)
            except Exception as exc:
                raise StageFailure("parse", where, exc) from exc
            if seg.parse.is_full:
                n_full += 1
            elif seg.parse.trees:
                n_partial += 1
            if not stage("extract"):
                continue
            evidence = Evidence(doc=analysis.doc.source, segment=seg.segment.index)
            try:
                seg.extraction = match_patterns(
                    seg.parse, resources.patterns, resources.exceptions
                )
                if seg.extraction.matched:
                    n_matched += 1
                try:
                    seg.measurement = extract_measurement(
                        seg.tagged, resources.measures, focus, evidence
                    )
                except NotAMeasurement:
                    seg.measurement = None
                except FocusUnresolved as exc:
                    seg.measurement = None
                    unresolved += 1
                    logger.warning("%s: %s", where, exc)
            except Exception as exc:
                raise StageFailure("extract", where, exc) from exc
            if seg.measurement is not None:
                result.measurements.append(seg.measurement)
            # the most recent entity mention is the focus for generic heads
            if seg.extraction.emissions:
                focus.update(seg.extraction.emissions[-1].entity)
            if (seg.measurement is not None
                    and seg.measurement.origin is MeasurementOrigin.COMPOUND_SPLIT):
                focus.update(seg.measurement.entity)

    if stage("extract"):
        per_segment = [
            (seg.extraction, Evidence(doc=a.doc.source, segment=seg.segment.index))
            for a in analyses
            for seg in a.segments
            if seg.extraction is not None
        ]
        result.table = aggregate(per_segment)

    if stage("cluster") and result.table is not None:
        result.matrix = CoocMatrix.from_table(result.table)
        result.clusters = _representative_clusters(result.matrix, config.cluster_cap)
        result.inventories = [
            (entity, property_inventory(result.matrix, entity, config.min_count))
            for entity in result.matrix.entity_values
        ]

    ontology_pairs: list[tuple] = []
    if stage("suggest"):
        ontology_pairs = _build_ontology(result, resources)
        items = []
        for analysis in analyses:
            items.extend(harvest_lexicon_items(analysis))
        for fact, evidence in ontology_pairs:
            items.append((SuggestionKind.ONTOLOGY, fact, evidence))
        result.new_suggestions = store.record_suggestions(run_id, items)
        for fact, _evidence in ontology_pairs:
            sugg = store.find(SuggestionKind.ONTOLOGY, fact)
            status = sugg.status.value if sugg else "SUGGESTED"
            result.ontology_rows.append((fact, status, _evidence))

    coverage = {
        "segments": n_segments,
        "full": n_full,
        "partial": n_partial,
        "unparsed": n_segments - n_full - n_partial if stage("parse") else 0,
        "matched": n_matched,
        "unmatched": n_segments - n_matched if stage("extract") else 0,
        "xxx_tokens": count_unknown_tokens(all_tagged) if stage("tag") else 0,
        "full_ratio": round(n_full / n_segments, 4) if n_segments and stage("parse") else 0.0,
        "unresolved_measurements": unresolved,
    }
    result.coverage = coverage
    store.close_run(run_id, coverage)

    if out_dir is not None:
        result.written = write_artifacts(result, Path(out_dir), until)
    return result


def write_artifacts(result: RunResult, out_dir: Path, until: str = "suggest") -> list[Path]:
    """Write every artifact the reached stage supports; deterministic bytes."""
    depth = STAGES.index(until)

    def stage(name):
        return depth >= STAGES.index(name)

    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    def emit(name: str, text: str):
        path = out_dir / name
        path.write_text(text, encoding="utf-8")
        written.append(path)

    layers = [name for name, st in (("POS", "tag"), ("PARSE", "parse"),
                                    ("RELATION", "extract")) if stage(st)]
    for analysis in result.analyses:
        stem = Path(analysis.doc.source).stem
        emit(stem + ".xml", export_document_xml(analysis, layers))
    if stage("extract") and result.table is not None:
        emit("relations.xml", export_relations_xml(result.table))
        emit("relations.tsv", export_relations_tsv(result.table))
    if stage("cluster"):
        emit("clusters.xml", export_clusters_xml(result.clusters))
        emit("inventories.xml", export_inventories_xml(result.inventories))
    if stage("suggest"):
        emit("ontology.xml", export_ontology_xml(result.ontology_rows))
    emit("coverage.json", json.dumps(result.coverage, indent=2, sort_keys=True) + "\n")
    return written

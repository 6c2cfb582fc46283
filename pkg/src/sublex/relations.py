"""Pattern-based extraction of entity/value relations from parsed records.

Patterns describe the flat shape of one clause (NP + predicate + terminator
variants); they are tried in file order and the first one that matches - and
whose entity is not on that pattern's exception list - emits. Conjoined
noun phrases distribute: "Leber und Niere ohne Besonderheiten." yields one
relation per conjunct with the same value. Conjoined predicates attach both
values to the one entity. Multi-word predicates ("nicht sehr breit") are
joined with hyphens into a single value string.

Entity strings are the clause's NP surface minus any leading determiner, so
complex NPs keep their internal structure ("Erweiterung des Herzens").
Adjective and participle values are stored with a lower-cased initial (the
citation form); PP values keep their surface verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .parser import ParseNode, ParseResult


class PatternError(ValueError):
    """Raised for unloadable pattern or exception resources."""


@dataclass(frozen=True)
class SlotMatcher:
    category: str
    qualifier: str | None = None

    def matches(self, node: ParseNode) -> bool:
        if self.category == "FS":
            return node.category == "FS" or (
                node.category == "PUNCT" and node.surface in (".", "!", "?")
            )
        if node.category != self.category:
            return False
        q = self.qualifier
        if q is None:
            return True
        if self.category == "NP":
            if q == "coord":
                return node.rule == "NPK"
            if q == "adjhead":
                return node.rule == "NPA"
            raise PatternError("unknown NP qualifier %r" % q)
        if self.category == "AP":
            if q == "simple":
                return node.rule != "APC" and _leaf_count(node) == 1
            if q == "multi":
                return node.rule != "APC" and _leaf_count(node) >= 2
            if q == "coord":
                return node.rule == "APC"
            raise PatternError("unknown AP qualifier %r" % q)
        if self.category == "V":
            return node.surface in q.split("|")
        raise PatternError("qualifier %r not valid for %s" % (q, self.category))


@dataclass(frozen=True)
class PatternRule:
    name: str
    shape: tuple[SlotMatcher, ...]
    extractor: str
    value_slot: int


@dataclass(frozen=True)
class Evidence:
    doc: str
    segment: int


@dataclass(frozen=True)
class Emission:
    """One extracted (entity, value) pair plus its supporting NP node."""

    pattern: str
    entity: str
    value: str
    entity_node: ParseNode


@dataclass
class SegmentExtraction:
    matched: bool
    pattern: str | None
    emissions: list[Emission] = field(default_factory=list)


@dataclass
class RelationRow:
    entity: str
    values: "dict[str, int]"
    evidence: list[Evidence]


class RelationTable:
    """Aggregated entity -> value -> count table, first-occurrence ordered."""

    def __init__(self):
        self.rows: dict[str, RelationRow] = {}

    def add(self, entity: str, value: str, evidence: Evidence, count: int = 1):
        row = self.rows.get(entity)
        if row is None:
            row = RelationRow(entity=entity, values={}, evidence=[])
            self.rows[entity] = row
        row.values[value] = row.values.get(value, 0) + count
        if evidence not in row.evidence:
            row.evidence.append(evidence)

    def total_count(self) -> int:
        return sum(c for row in self.rows.values() for c in row.values.values())

    def entities(self):
        return list(self.rows)

    def pairs(self):
        for entity, row in self.rows.items():
            for value, count in row.values.items():
                yield entity, value, count


def _leaf_count(node: ParseNode) -> int:
    return sum(1 for _ in node.leaves())


def _normalize_value_leaf(leaf: ParseNode) -> str:
    surface = leaf.surface
    if leaf.category in ("ADJ", "V") and surface and surface[0].isupper():
        return surface[0].lower() + surface[1:]
    return surface


def entity_string(np: ParseNode) -> str:
    """NP surface without leading determiners."""
    leaves = list(np.leaves())
    while leaves and leaves[0].reading_cls in ("DETD", "DETI"):
        leaves = leaves[1:]
    return " ".join(l.surface for l in leaves)


def entity_nodes(np: ParseNode) -> list[ParseNode]:
    """Conjoined NPs distribute into their conjuncts; the adjective-headed
    coordination NP contributes its inner head NP."""
    if np.rule == "NPK":
        out = []
        for child in np.children:
            if child.category == "NP":
                out.extend(entity_nodes(child))
        return out
    if np.rule == "NPA":
        return [np.children[3]]
    return [np]


def _ap_conjuncts(ap: ParseNode) -> list[ParseNode]:
    if ap.rule == "APC":
        out = []
        for child in ap.children:
            if child.category == "AP":
                out.extend(_ap_conjuncts(child))
        return out
    return [ap]


def _hyphen_value(ap: ParseNode) -> str:
    return "-".join(_normalize_value_leaf(l) for l in ap.leaves())


def _extract_values(pattern: PatternRule, unit: list[ParseNode]) -> list[str]:
    node = unit[pattern.value_slot]
    if pattern.extractor == "simple":
        return [_normalize_value_leaf(next(iter(node.leaves())))]
    if pattern.extractor == "hyphen":
        return [_hyphen_value(node)]
    if pattern.extractor == "coord":
        return [_hyphen_value(c) for c in _ap_conjuncts(node)]
    if pattern.extractor == "ppsurface":
        return [" ".join(l.surface for l in node.leaves())]
    if pattern.extractor == "headadjs":
        values = []
        for child in node.children:
            if child.category == "ADJ":
                values.append(_normalize_value_leaf(child))
        return values
    raise PatternError("unknown extractor %r" % pattern.extractor)


def parse_patterns(text: str) -> list[PatternRule]:
    rules = []
    names = set()
    for lineno, rawline in enumerate(text.splitlines(), 1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(";")]
        if len(parts) < 3:
            raise PatternError("patterns line %d: expected 'NAME ; shape ; values=...'" % lineno)
        name = parts[0]
        if name in names:
            raise PatternError("patterns line %d: duplicate pattern %r" % (lineno, name))
        names.add(name)
        shape = []
        for slot in parts[1].split():
            if ":" in slot:
                cat, qual = slot.split(":", 1)
                shape.append(SlotMatcher(cat, qual))
            else:
                shape.append(SlotMatcher(slot))
        if not shape or shape[-1].category != "FS":
            raise PatternError("patterns line %d: shape must end with FS" % lineno)
        spec = parts[2]
        if not spec.startswith("values="):
            raise PatternError("patterns line %d: missing values=..." % lineno)
        extractor, _, slot_text = spec[len("values="):].partition(":")
        if not slot_text.isdigit() or int(slot_text) >= len(shape):
            raise PatternError("patterns line %d: bad value slot" % lineno)
        rules.append(PatternRule(name, tuple(shape), extractor, int(slot_text)))
    if not rules:
        raise PatternError("pattern file defines no patterns")
    return rules


def load_patterns(path: str | Path) -> list[PatternRule]:
    return parse_patterns(Path(path).read_text(encoding="utf-8"))


def parse_exceptions(text: str) -> dict[str, frozenset]:
    table: dict[str, set] = {}
    for lineno, rawline in enumerate(text.splitlines(), 1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) < 2:
            raise PatternError("exceptions line %d: expected 'PATTERN ENTITY...'" % lineno)
        table.setdefault(parts[0], set()).update(parts[1:])
    return {k: frozenset(v) for k, v in table.items()}


def load_exceptions(path: str | Path) -> dict[str, frozenset]:
    return parse_exceptions(Path(path).read_text(encoding="utf-8"))


def clause_units(result: ParseResult) -> list[list[ParseNode]]:
    """Flat matchable sequences, one per clause.

    A full S-tree decomposes into its clauses (CL children flattened, comma
    separators dropped) with the terminator appended to each; any other full
    tree is one unit; a partial cover is matched as-is.
    """
    units: list[list[ParseNode]] = []
    if not result.is_full:
        seq: list[ParseNode] = []
        for node in result.trees:
            if node.category == "CL":
                seq.extend(node.children)
            else:
                seq.append(node)
        return [seq] if seq else []
    for tree in result.trees:
        if tree.category != "S":
            units.append([tree])
            continue
        terminator = None
        clauses: list[list[ParseNode]] = []
        current: list[ParseNode] = []
        for child in tree.children:
            if child.category == "CL":
                if current:
                    clauses.append(current)
                    current = []
                clauses.append(list(child.children))
            elif child.category == "COMMA":
                if current:
                    clauses.append(current)
                    current = []
            elif child.category == "FS":
                terminator = child
            else:
                current.append(child)
        if current:
            clauses.append(current)
        for clause in clauses:
            units.append(clause + [terminator] if terminator is not None else clause)
    return units


def _match_unit(pattern: PatternRule, unit: list[ParseNode]) -> bool:
    # FS may match past the end (unterminated record); everything else is
    # position-for-position
    i = 0
    for matcher in pattern.shape:
        if i >= len(unit):
            if matcher.category == "FS":
                continue
            return False
        if not matcher.matches(unit[i]):
            return False
        i += 1
    return i >= len(unit)


def match_patterns(
    result: ParseResult,
    patterns: list[PatternRule],
    exceptions: dict[str, frozenset] | None = None,
) -> SegmentExtraction:
    """First matching pattern per clause; emissions deduplicated across parse
    readings. matched=False doubles as the no-pattern record for coverage."""
    exceptions = exceptions or {}
    emissions: list[Emission] = []
    seen: set[tuple] = set()
    matched_pattern = None
    for unit in clause_units(result):
        for pattern in patterns:
            if not _match_unit(pattern, unit):
                continue
            np_node = unit[0]
            excluded = exceptions.get(pattern.name, frozenset())
            targets = [n for n in entity_nodes(np_node) if entity_string(n) not in excluded]
            if not targets:
                continue  # everything excepted: keep trying later patterns
            values = _extract_values(pattern, unit)
            emitted_here = False
            for target in targets:
                entity = entity_string(target)
                for value in values:
                    key = (entity, value)
                    if key not in seen:
                        seen.add(key)
                        emissions.append(Emission(pattern.name, entity, value, target))
                    emitted_here = True
            if emitted_here:
                matched_pattern = matched_pattern or pattern.name
                break
    return SegmentExtraction(
        matched=bool(emissions), pattern=matched_pattern, emissions=emissions
    )


def aggregate(per_segment: list[tuple[SegmentExtraction, Evidence]]) -> RelationTable:
    """Corpus-level counts; total count equals the number of emissions."""
    table = RelationTable()
    for extraction, evidence in per_segment:
        for emission in extraction.emissions:
            table.add(emission.entity, emission.value, evidence)
    return table

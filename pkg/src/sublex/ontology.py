"""Ontology suggestion builders.

Everything here produces SUGGESTED facts for a human to confirm; nothing is
asserted automatically. The part-of triggers (genitive NP, locative PP) are
reconstructions of constructions the source texts use, and say so in the
fact note so reviewers know the provenance. De-genitivization is a crude
strip of the final -s for masculine/neuter genitives; the reviewer sees the
raw surface in the evidence and can reject a bad guess.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .measurements import Measurement, property_range
from .parser import ParseNode
from .relations import Emission, Evidence, entity_nodes


class FactKind(str, enum.Enum):
    IS_A = "IS_A"
    PART_OF = "PART_OF"
    HAS_PROPERTY_DIM = "HAS_PROPERTY_DIM"
    VALUE_RANGE = "VALUE_RANGE"
    # extension kinds: concept-name detection and unmapped-value review items
    CONCEPT = "CONCEPT"
    DIMENSION_UNKNOWN = "DIMENSION_UNKNOWN"


class CandidateKind(str, enum.Enum):
    ENTITY_CONCEPT = "ENTITY_CONCEPT"
    PROPERTY_VALUE_PHRASE = "PROPERTY_VALUE_PHRASE"


@dataclass(frozen=True)
class OntologyFact:
    """One suggested fact. Equality deliberately ignores evidence and count
    so that the store can deduplicate identical payloads and merge their
    evidence. VALUE_RANGE carries (min, max, unit) as payload."""

    kind: FactKind
    subject: str
    object: str
    payload: tuple[float, float, str] | None = None
    note: str = ""
    evidence: tuple[Evidence, ...] = field(default=(), compare=False)
    count: int = field(default=1, compare=False)

    def __post_init__(self):
        if self.kind is FactKind.VALUE_RANGE:
            if self.payload is None:
                raise ValueError("VALUE_RANGE needs a (min, max, unit) payload")
            lo, hi, _unit = self.payload
            if lo > hi:
                raise ValueError("range min exceeds max")
        elif self.payload is not None:
            raise ValueError("payload only allowed on VALUE_RANGE")

    def render(self) -> str:
        if self.payload is not None:
            lo, hi, unit = self.payload
            args = (self.subject, self.object, format_number(lo), format_number(hi), unit)
        else:
            args = (self.subject, self.object) if self.object else (self.subject,)
        return "%s(%s)" % (self.kind.value, ", ".join(args))


@dataclass
class ConceptCandidate:
    name: str
    kind: CandidateKind
    evidence: list[Evidence]
    score: int


def format_number(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else ("%g" % x)


# -- dimension lexicon -------------------------------------------------------

GENERIC_DIMENSION = "generic"


@dataclass
class DimensionTable:
    """value -> dimension name mapping; 'generic' is the conventional name
    for values too unspecific to characterize a concept."""

    mapping: dict[str, str]

    @classmethod
    def parse(cls, text: str) -> "DimensionTable":
        mapping = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError("dimension line needs 'value dimension': %r" % raw)
            mapping[parts[0]] = parts[1]
        return cls(mapping)

    @classmethod
    def from_path(cls, path: str | Path) -> "DimensionTable":
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    def classify(self, value: str) -> str | None:
        return self.mapping.get(value)


@dataclass
class ConceptClassification:
    entity: str
    by_dimension: dict[str, list[str]]
    generic_values: list[str]
    unknown_values: list[str]
    facts: list[OntologyFact]


def classify_concept(
    entity: str,
    inventory: list[tuple[str, int]],
    dims: DimensionTable,
    min_values: int = 1,
) -> ConceptClassification:
    """Map an entity's observed values through the dimension lexicon.

    One HAS_PROPERTY_DIM fact per non-generic dimension with at least
    min_values distinct values; generic values are only noted; values the
    lexicon does not know become DIMENSION_UNKNOWN review items.
    """
    by_dimension: dict[str, list[str]] = {}
    generic: list[str] = []
    unknown: list[str] = []
    for value, _count in inventory:
        dim = dims.classify(value)
        if dim is None:
            unknown.append(value)
        elif dim == GENERIC_DIMENSION:
            generic.append(value)
        else:
            by_dimension.setdefault(dim, []).append(value)
    facts = []
    for dim, values in by_dimension.items():
        if len(values) < min_values:
            continue
        facts.append(OntologyFact(
            kind=FactKind.HAS_PROPERTY_DIM,
            subject=entity,
            object=dim,
            note="values: " + ", ".join(values),
        ))
    for value in unknown:
        facts.append(OntologyFact(
            kind=FactKind.DIMENSION_UNKNOWN,
            subject=entity,
            object=value,
        ))
    return ConceptClassification(
        entity=entity,
        by_dimension=by_dimension,
        generic_values=generic,
        unknown_values=unknown,
        facts=facts,
    )


# -- concept-name detection --------------------------------------------------

_ADJ_NOUN_RULES = ("NP3", "NP4", "NP5", "NP6")


def _adj_noun_name(np: ParseNode) -> str:
    """Concept name for an attributive-adjective NP: determiners dropped,
    adjectives decapitalized (segment-initial position capitalizes them)."""
    parts = []
    for leaf in np.leaves():
        if leaf.reading_cls in ("DETD", "DETI"):
            continue
        surface = leaf.surface
        if leaf.category == "ADJ" and surface and surface[0].isupper():
            surface = surface[0].lower() + surface[1:]
        parts.append(surface)
    return " ".join(parts)


def detect_concepts(
    matched: Iterable[tuple[Emission, Evidence]],
    forests: Iterable[tuple[ParseNode, Evidence]],
) -> list[ConceptCandidate]:
    """Adjective+noun phrases: naming concepts when they fill the entity
    slot of a matched pattern, property-value phrases when they only ever
    occur elsewhere. Entity-position evidence wins."""
    entity_named: dict[str, ConceptCandidate] = {}
    seen_anywhere: dict[str, ConceptCandidate] = {}
    for emission, evidence in matched:
        node = emission.entity_node
        if node.rule not in _ADJ_NOUN_RULES:
            continue
        name = _adj_noun_name(node)
        cand = entity_named.get(name)
        if cand is None:
            cand = ConceptCandidate(name, CandidateKind.ENTITY_CONCEPT, [], 0)
            entity_named[name] = cand
        cand.score += 1
        if evidence not in cand.evidence:
            cand.evidence.append(evidence)
    for tree, evidence in forests:
        for node in tree.iter_nodes():
            if node.rule not in _ADJ_NOUN_RULES:
                continue
            name = _adj_noun_name(node)
            cand = seen_anywhere.get(name)
            if cand is None:
                cand = ConceptCandidate(name, CandidateKind.PROPERTY_VALUE_PHRASE, [], 0)
                seen_anywhere[name] = cand
            cand.score += 1
            if evidence not in cand.evidence:
                cand.evidence.append(evidence)
    out = list(entity_named.values())
    for name, cand in seen_anywhere.items():
        if name not in entity_named:
            out.append(cand)
    return out


def concept_facts(candidates: Iterable[ConceptCandidate]) -> list[OntologyFact]:
    facts = []
    for cand in candidates:
        if cand.kind is not CandidateKind.ENTITY_CONCEPT:
            continue
        facts.append(OntologyFact(
            kind=FactKind.CONCEPT,
            subject=cand.name,
            object="",
            note="named by attributive-adjective NP in entity position",
            evidence=tuple(cand.evidence),
            count=cand.score,
        ))
    return facts


# -- part-of -----------------------------------------------------------------

def load_locatives(path: str | Path) -> frozenset:
    words = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            words.append(line)
    return frozenset(words)


def strip_genitive(surface: str, genders: frozenset) -> str:
    """Masculine/neuter s-genitive back to a citation-ish form. Feminine
    and plural genitives are unmarked, leave them alone."""
    if surface.endswith("s") and len(surface) > 2 and genders & {"MAS", "NTR"}:
        return surface[:-1]
    return surface


# head slot per NP rule; mirrors the default grammar, used only to name
# part-of arguments by their head noun ("Schleimhaut des Magens" -> Schleimhaut)
_NP_HEADS = {"NP1": 0, "NP2": 1, "NP3": 2, "NP4": 1, "NP5": 3, "NP6": 2,
             "NPG": 0, "NPC3": 0, "NPK": 0, "NPA": 3}


def head_noun(np: ParseNode) -> str:
    node = np
    while node.children:
        node = node.children[_NP_HEADS.get(node.rule, 0)]
    return node.surface


def _head_nouns(np: ParseNode) -> list[str]:
    """One head per coordinated conjunct, else the single head."""
    return [head_noun(n) for n in entity_nodes(np)]


def _hypothesized(np: ParseNode) -> bool:
    return any(leaf.assumed for leaf in np.leaves())


def _gen_marked(np: ParseNode) -> bool:
    """Some leaf inside carries genitive morphology of its own. The NPG
    rule fixes the attribute NP to GEN unopposed when every word is
    case-open, and that fix alone is no evidence of a genitive."""
    for leaf in np.leaves():
        original = leaf.original or leaf.features
        if "GEN" in original.get("cas") and not original.is_full("cas"):
            return True
    return False


def infer_partof(
    forests: Iterable[tuple[ParseNode, Evidence]],
    locatives: frozenset,
) -> list[OntologyFact]:
    """PART_OF suggestions from NP-internal genitives and dative locative
    PPs. Both triggers are reconstructions; the note says which fired.
    A trigger NP built on a hypothesized word class proves nothing and is
    skipped; arguments are named by head noun, coordination distributes."""
    merged: dict[OntologyFact, OntologyFact] = {}
    seen = set()

    def emit(subject: str, obj: str, note: str, evidence: Evidence):
        key = (subject, obj, note, evidence)
        if key in seen:
            return
        seen.add(key)
        fact = OntologyFact(FactKind.PART_OF, subject, obj, note=note)
        prior = merged.get(fact)
        if prior is None:
            merged[fact] = OntologyFact(
                FactKind.PART_OF, subject, obj, note=note,
                evidence=(evidence,), count=1,
            )
        else:
            refs = prior.evidence if evidence in prior.evidence else prior.evidence + (evidence,)
            merged[fact] = OntologyFact(
                FactKind.PART_OF, subject, obj, note=note,
                evidence=refs, count=prior.count + 1,
            )

    for tree, evidence in forests:
        for node in tree.iter_nodes():
            if node.rule == "NPG":
                inner = node.children[1]
                if _hypothesized(inner) or not _gen_marked(inner):
                    continue
                whole = strip_genitive(head_noun(inner), inner.features.get("gen"))
                for part in _head_nouns(node.children[0]):
                    if part and whole:
                        emit(part, whole, "genitive NP (reconstructed trigger)",
                             evidence)
            elif node.rule == "NPC3":
                pp = node.children[1]
                prp = next(iter(pp.leaves()))
                inner = pp.children[1]
                if prp.surface.lower() not in locatives:
                    continue
                if "DAT" not in pp.features.get("cas"):
                    continue
                if _hypothesized(inner):
                    continue
                whole = head_noun(inner)
                note = "localisation: %s (reconstructed trigger)" % prp.surface.lower()
                for part in _head_nouns(node.children[0]):
                    if part and whole:
                        emit(part, whole, note, evidence)
    return list(merged.values())


# -- is-a and ranges ---------------------------------------------------------

def load_upper_ontology(path: str | Path) -> list[str]:
    names = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            names.append(line)
    return names


def suggest_isa(measurements: Iterable[Measurement], upper: list[str]) -> list[OntologyFact]:
    """The <organ>gewicht compound schema: a weight split out of a compound
    implies its owner is an Organ. Needs the anchor concept to exist."""
    if "Organ" not in upper:
        return []
    merged: dict[str, OntologyFact] = {}
    for m in measurements:
        if m.origin.value != "COMPOUND_SPLIT" or m.prop != "Gewicht":
            continue
        prior = merged.get(m.entity)
        if prior is None:
            merged[m.entity] = OntologyFact(
                FactKind.IS_A, m.entity, "Organ",
                note="from <organ>gewicht compound",
                evidence=(m.evidence,), count=1,
            )
        else:
            refs = prior.evidence if m.evidence in prior.evidence else prior.evidence + (m.evidence,)
            merged[m.entity] = OntologyFact(
                FactKind.IS_A, m.entity, "Organ",
                note="from <organ>gewicht compound",
                evidence=refs, count=prior.count + 1,
            )
    return list(merged.values())


def range_facts(measurements: list[Measurement]) -> list[OntologyFact]:
    """One VALUE_RANGE per (entity, property, unit) group."""
    groups: dict[tuple[str, str, str], list[Measurement]] = {}
    for m in measurements:
        groups.setdefault((m.entity, m.prop, m.unit), []).append(m)
    facts = []
    for (entity, prop, unit), members in groups.items():
        lo, hi, n = property_range(members, entity, prop, unit=unit)
        note = "n=%d" % n
        if n == 1:
            note += " low-evidence"
        refs: tuple[Evidence, ...] = ()
        for m in members:
            if m.evidence not in refs:
                refs = refs + (m.evidence,)
        facts.append(OntologyFact(
            kind=FactKind.VALUE_RANGE,
            subject=entity,
            object=prop,
            payload=(float(lo), float(hi), unit),
            note=note,
            evidence=refs,
            count=n,
        ))
    return facts

"""Measurement records and the discourse focus that resolves generic heads.

Two record shapes are handled:

  "Lebergewicht 1490 g."   compound head, split against the suffix table
  "Gewicht 135 g."         generic head, resolved against the focus register

The focus register holds the single most recent entity any extraction
pattern matched; it empties at document boundaries. A generic measurement
before any focus exists is an error the pipeline records, never a guess.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .docmodel import Shape
from .relations import Evidence
from .tagging import POSClass, TaggedToken


class MeasurementOrigin(str, Enum):
    COMPOUND_SPLIT = "COMPOUND_SPLIT"
    FOCUS = "FOCUS"


class FocusUnresolved(ValueError):
    """Generic measurement head with no prior entity in this document."""


class NotAMeasurement(ValueError):
    """Segment does not have the <head> <number> <unit> shape."""


class NoData(ValueError):
    """No measurements for the requested entity/property/unit."""


@dataclass(frozen=True)
class Measurement:
    entity: str
    prop: str
    value: float
    value_text: str  # surface form, decimal comma preserved
    unit: str
    origin: MeasurementOrigin
    evidence: Evidence


@dataclass
class MeasureTable:
    """Unit tokens, compound suffixes and generic heads, from measures.txt."""

    units: frozenset
    suffixes: dict[str, str]
    generics: dict[str, str]

    @classmethod
    def parse(cls, text: str) -> "MeasureTable":
        units = set()
        suffixes = {}
        generics = {}
        for lineno, rawline in enumerate(text.splitlines(), 1):
            line = rawline.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "unit" and len(parts) == 2:
                units.add(parts[1])
            elif parts[0] == "suffix" and len(parts) == 3:
                suffixes[parts[1].lower()] = parts[2]
            elif parts[0] == "generic" and len(parts) == 3:
                generics[parts[1]] = parts[2]
            else:
                raise ValueError("measures line %d: unparseable %r" % (lineno, rawline))
        return cls(frozenset(units), suffixes, generics)

    @classmethod
    def from_path(cls, path: str | Path) -> "MeasureTable":
        return cls.parse(Path(path).read_text(encoding="utf-8"))


class FocusRegister:
    """Single-entity discourse memory, per document."""

    def __init__(self):
        self.entity: str | None = None

    def update(self, entity: str):
        self.entity = entity

    def clear(self):
        self.entity = None


def _number_value(surface: str) -> float:
    return float(surface.replace(",", "."))


def extract_measurement(
    tagged: list[TaggedToken],
    table: MeasureTable,
    focus: FocusRegister,
    evidence: Evidence,
) -> Measurement:
    """Read one measurement off a tagged segment.

    The head is the first noun-readable word token; the value is the first
    number token after it, which must be followed by a unit token. Raises
    NotAMeasurement when the shape is absent, FocusUnresolved for a generic
    head with an empty register.
    """
    head = None
    number_at = None
    for i, tok in enumerate(tagged):
        if head is None and tok.has_class(POSClass.N) and tok.token.shape is not Shape.NUMBER:
            if tok.token.surface not in table.units:
                head = tok.token.surface
                continue
        if head is not None and tok.token.shape is Shape.NUMBER:
            number_at = i
            break
    if head is None or number_at is None or number_at + 1 >= len(tagged):
        raise NotAMeasurement("no '<head> <number> <unit>' shape")
    unit_tok = tagged[number_at + 1].token.surface
    if unit_tok not in table.units:
        raise NotAMeasurement("number not followed by a known unit")
    value_text = tagged[number_at].token.surface
    value = _number_value(value_text)
    if value <= 0:
        raise NotAMeasurement("non-positive measurement value")

    lowered = head.lower()
    for suffix, prop in table.suffixes.items():
        if lowered.endswith(suffix) and len(lowered) > len(suffix):
            prefix = head[: len(head) - len(suffix)]
            entity = prefix[0].upper() + prefix[1:]
            return Measurement(
                entity, prop, value, value_text, unit_tok,
                MeasurementOrigin.COMPOUND_SPLIT, evidence,
            )
    if head in table.generics:
        if focus.entity is None:
            raise FocusUnresolved("generic head %r before any entity" % head)
        return Measurement(
            focus.entity, table.generics[head], value, value_text, unit_tok,
            MeasurementOrigin.FOCUS, evidence,
        )
    raise NotAMeasurement("head %r is neither compound nor generic" % head)


def property_range(
    measurements: list[Measurement],
    entity: str,
    prop: str,
    unit: str | None = None,
) -> tuple[float, float, int]:
    """(min, max, n) over matching measurements; one unit at a time."""
    matching = [m for m in measurements if m.entity == entity and m.prop == prop]
    if unit is not None:
        matching = [m for m in matching if m.unit == unit]
    else:
        units = {m.unit for m in matching}
        if len(units) > 1:
            raise NoData(
                "mixed units %s for %s/%s: pass unit=" % (sorted(units), entity, prop)
            )
    if not matching:
        raise NoData("no measurements for %s/%s" % (entity, prop))
    values = [m.value for m in matching]
    return (min(values), max(values), len(values))

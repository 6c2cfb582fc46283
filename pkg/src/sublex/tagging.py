"""Part-of-speech assignment for telegraphic German findings text.

Tagging is lookup-first: the reviewed lexicon and the closed-class table
answer when they can; lexical-gap heuristics fire only when both are silent,
in configured order with first match winning; tokens nothing claims fall back
to the unknown class XXX with full features so the parser can hypothesize.

Heuristics:

  UNG   uppercase-initial word ending in -ung/-ungen: noun, feminine,
        number from the ending (SG/PL), case open.
  UC1   uppercase-initial word: noun, everything open. Fires at segment start
        too - noun-initial records dominate this text type.
  NUM   number-shaped token: NUMBERTOK.
  ADJE  lowercase word with a declension ending (e/er/es/em/en) next to a
        noun candidate: adjective. Off in the default configuration; it
        overfires on this corpus and stays available as a config switch.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

from .docmodel import Segment, SegmentKind, Shape, Token
from .features import FULL_BUNDLE, FeatureBundle, parse_bundle

logger = logging.getLogger(__name__)


class POSClass(str, Enum):
    N = "N"
    ADJ = "ADJ"
    V = "V"
    DETD = "DETD"
    DETI = "DETI"
    PRP = "PRP"
    PRON = "PRON"
    ADV = "ADV"
    NEG = "NEG"
    CONJ = "CONJ"
    NUMBERTOK = "NUMBERTOK"
    PUNCT = "PUNCT"
    XXX = "XXX"


class Source(str, Enum):
    LEXICON = "LEXICON"
    CLOSED = "CLOSED"
    UNG = "UNG"
    UC1 = "UC1"
    ADJE = "ADJE"
    NUM = "NUM"
    NONE = "NONE"


HEURISTIC_SOURCES = (Source.UNG, Source.UC1, Source.ADJE, Source.NUM)


@dataclass(frozen=True)
class POSReading:
    cls: POSClass
    features: FeatureBundle = FULL_BUNDLE
    src: Source = Source.LEXICON
    lemma: str | None = None


@dataclass
class TaggedToken:
    token: Token
    readings: tuple[POSReading, ...]

    def has_class(self, cls: POSClass) -> bool:
        return any(r.cls is cls for r in self.readings)

    @property
    def is_unknown(self) -> bool:
        return len(self.readings) == 1 and self.readings[0].cls is POSClass.XXX


def _dedup(readings) -> tuple[POSReading, ...]:
    """Readings are unique by (class, features); first source wins."""
    seen = set()
    out = []
    for r in readings:
        key = (r.cls, r.features)
        if key not in seen:
            seen.add(key)
            out.append(r)
    return tuple(out)


def _decap(surface: str) -> str | None:
    if surface and surface[0].isupper():
        return surface[0].lower() + surface[1:]
    return None


class TextLexicon:
    """Word list backed by a text resource: surface, class, cas, num, gen.

    Serves both the closed-class table and seed/demo lexica. Lookup tries the
    exact surface first, then a lower-cased initial (segment-initial
    capitalization of closed-class words and adjectives).
    """

    def __init__(self, entries: dict[str, tuple[POSReading, ...]], origin: Source):
        self._entries = entries
        self.origin = origin

    @classmethod
    def parse(cls, text: str, origin: Source) -> "TextLexicon":
        entries: dict[str, list[POSReading]] = {}
        for lineno, rawline in enumerate(text.splitlines(), 1):
            line = rawline.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) < 2:
                raise ValueError("lexicon line %d: expected 'surface class [cas num gen]'" % lineno)
            surface, clsname = parts[0], parts[1]
            cells = parts[2:5] if len(parts) > 2 else []
            while len(cells) < 3:
                cells.append("_")
            try:
                reading = POSReading(
                    cls=POSClass(clsname),
                    features=parse_bundle(*cells),
                    src=origin,
                )
            except ValueError as exc:
                raise ValueError("lexicon line %d: %s" % (lineno, exc)) from exc
            entries.setdefault(surface, []).append(reading)
        return cls({k: tuple(v) for k, v in entries.items()}, origin)

    @classmethod
    def from_path(cls, path, origin: Source) -> "TextLexicon":
        from pathlib import Path

        return cls.parse(Path(path).read_text(encoding="utf-8"), origin)

    def lookup(self, surface: str) -> tuple[POSReading, ...]:
        hit = self._entries.get(surface)
        if hit:
            return hit
        alt = _decap(surface)
        if alt:
            return self._entries.get(alt, ())
        return ()

    def __len__(self):
        return len(self._entries)


class CompositeLexicon:
    """Seed entries plus whatever the reviewed store currently accepts."""

    def __init__(self, *layers):
        self.layers = [l for l in layers if l is not None]

    def lookup(self, surface: str) -> tuple[POSReading, ...]:
        out = []
        for layer in self.layers:
            out.extend(layer.lookup(surface))
        return _dedup(out)


class EmptyLexicon:
    def lookup(self, surface: str) -> tuple[POSReading, ...]:
        return ()


@dataclass(frozen=True)
class HeuristicConfig:
    """Ordered heuristic switch list; first match wins."""

    order: tuple[tuple[str, bool], ...] = (
        ("UNG", True),
        ("UC1", True),
        ("NUM", True),
        ("ADJE", False),
    )

    @classmethod
    def parse(cls, text: str) -> "HeuristicConfig":
        order = []
        for lineno, rawline in enumerate(text.splitlines(), 1):
            line = rawline.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2 or parts[1] not in ("on", "off"):
                raise ValueError("heuristics line %d: expected '<NAME> on|off'" % lineno)
            if parts[0] not in ("UNG", "UC1", "NUM", "ADJE"):
                raise ValueError("heuristics line %d: unknown heuristic %r" % (lineno, parts[0]))
            order.append((parts[0], parts[1] == "on"))
        return cls(order=tuple(order))


def apply_heuristics(
    token: Token,
    position: int,
    config: HeuristicConfig = HeuristicConfig(),
    left: Token | None = None,
    right: Token | None = None,
) -> tuple[POSReading, ...]:
    """Lexical-gap readings for a token both lexica missed.

    Neighbour tokens only matter to ADJE (adjacency to a noun candidate).
    """
    for name, enabled in config.order:
        if not enabled:
            continue
        if name == "UNG" and token.shape is Shape.WORD_UPPER_INIT:
            low = token.surface.lower()
            if low.endswith("ungen"):
                return (POSReading(POSClass.N, parse_bundle("_", "PL", "FEM"), Source.UNG),)
            if low.endswith("ung"):
                return (POSReading(POSClass.N, parse_bundle("_", "SG", "FEM"), Source.UNG),)
        elif name == "UC1" and token.shape is Shape.WORD_UPPER_INIT:
            return (POSReading(POSClass.N, FULL_BUNDLE, Source.UC1),)
        elif name == "NUM" and token.shape is Shape.NUMBER:
            return (POSReading(POSClass.NUMBERTOK, FULL_BUNDLE, Source.NUM),)
        elif name == "ADJE" and token.shape is Shape.WORD_LOWER:
            if any(token.surface.endswith(e) for e in ("e", "er", "es", "em", "en")):
                neighbour_noun = any(
                    t is not None and t.shape is Shape.WORD_UPPER_INIT for t in (left, right)
                )
                if neighbour_noun:
                    return (POSReading(POSClass.ADJ, FULL_BUNDLE, Source.ADJE),)
    return ()


class Tagger:
    """Assigns readings per token: lexicon and closed class first, then
    heuristics, then the XXX fallback. Deterministic and total."""

    def __init__(self, closed_class: TextLexicon, heuristics: HeuristicConfig = HeuristicConfig()):
        self.closed_class = closed_class
        self.heuristics = heuristics

    def tag_segment(self, segment: Segment, lexicon=None) -> list[TaggedToken]:
        lexicon = lexicon or EmptyLexicon()
        tagged: list[TaggedToken] = []
        tokens = segment.tokens
        for pos, token in enumerate(tokens):
            if token.shape is Shape.PUNCT:
                readings = (POSReading(POSClass.PUNCT, FULL_BUNDLE, Source.CLOSED),)
            else:
                readings = _dedup(
                    tuple(lexicon.lookup(token.surface)) + self.closed_class.lookup(token.surface)
                )
                if not readings:
                    readings = apply_heuristics(
                        token,
                        pos,
                        self.heuristics,
                        left=tokens[pos - 1] if pos > 0 else None,
                        right=tokens[pos + 1] if pos + 1 < len(tokens) else None,
                    )
                if not readings:
                    readings = (POSReading(POSClass.XXX, FULL_BUNDLE, Source.NONE),)
            tagged.append(TaggedToken(token=token, readings=readings))

        segment.kind = (
            SegmentKind.SENTENCE if any(_finite_verb(t) for t in tagged) else SegmentKind.TELEGRAPHIC
        )
        return tagged


def _finite_verb(tagged: TaggedToken) -> bool:
    # Only the closed-class verb forms are finite; acquired V entries are
    # participles in this text type.
    return any(r.cls is POSClass.V and r.src is Source.CLOSED for r in tagged.readings)


def count_unknown_tokens(tagged_segments) -> int:
    """Number of tokens whose only reading is XXX (bootstrap metric)."""
    return sum(1 for seg in tagged_segments for t in seg if t.is_unknown)

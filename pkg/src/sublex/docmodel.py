"""Document model: corpus files, segments, tokens.

Findings text is telegraphic: mostly verbless one-clause records terminated by
full stops, often behind an enumeration label ("24. Hirngewicht 1490 g.").
Segmentation splits at full stops followed by whitespace and an uppercase
letter or digit, with two guards:

  * a digit run that opens a segment is an enumeration label; its full stop
    never splits,
  * a configured abbreviation/unit token before the full stop suppresses a
    split when a bare digit follows (run-on measurement records such as
    "135 g. 4 cm" stay together) - unless that digit run is itself a label.

Umlaut transliterations (ae/oe/ue/ss) are kept exactly as written; the corpus
convention is part of the data.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

DEFAULT_SPLIT_EXCEPTIONS = ("g", "cm", "mm", "ml", "kg", "ca", "bzw", "evtl", "Nr")


class Shape(str, Enum):
    WORD_UPPER_INIT = "WORD_UPPER_INIT"
    WORD_LOWER = "WORD_LOWER"
    NUMBER = "NUMBER"
    PUNCT = "PUNCT"
    MIXED = "MIXED"


class SegmentKind(str, Enum):
    TELEGRAPHIC = "TELEGRAPHIC"
    SENTENCE = "SENTENCE"


class EmptyCorpus(ValueError):
    """Raised when a corpus directory yields no usable text files."""


@dataclass(frozen=True)
class Token:
    surface: str
    start: int
    end: int
    shape: Shape

    def __post_init__(self):
        if self.end <= self.start:
            raise ValueError("empty token span")


@dataclass
class Segment:
    index: int
    start: int
    end: int
    tokens: list[Token]
    label: str | None = None
    kind: SegmentKind = SegmentKind.TELEGRAPHIC

    @property
    def text_surface(self) -> str:
        return " ".join(t.surface for t in self.tokens)


@dataclass
class Document:
    source: str
    text: str
    segments: list[Segment] = field(default_factory=list)


@dataclass(frozen=True)
class RawCorpusFile:
    path: str
    name: str
    text: str


def token_shape(surface: str) -> Shape:
    """Shape is a pure function of the surface string."""
    if not surface:
        raise ValueError("empty surface")
    if all(ch.isdigit() or ch == "," for ch in surface) and surface[0].isdigit():
        return Shape.NUMBER
    first = surface[0]
    if first.isalpha():
        rest = surface[1:]
        if any(ch.isdigit() for ch in rest):
            return Shape.MIXED
        return Shape.WORD_UPPER_INIT if first.isupper() else Shape.WORD_LOWER
    if len(surface) == 1 and not surface.isalnum():
        return Shape.PUNCT
    return Shape.MIXED


def tokenize(text: str, offset: int = 0) -> list[Token]:
    """Split a segment's text into word, number and punctuation tokens.

    Words are maximal letter runs, optionally joined by word-internal hyphens
    ("weisslich-gelblich-verfaerbt" is one token). Numbers are digit runs with
    an optional decimal comma. Any other non-space character is a single
    punctuation token. Spans index into the enclosing source text.
    """
    tokens: list[Token] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        start = i
        if ch.isalpha():
            while i < n and text[i].isalpha():
                i += 1
            # word-internal hyphen: letter '-' letter
            while i + 1 < n and text[i] == "-" and text[i + 1].isalpha():
                i += 1
                while i < n and text[i].isalpha():
                    i += 1
        elif ch.isdigit():
            while i < n and text[i].isdigit():
                i += 1
            if i + 1 < n and text[i] == "," and text[i + 1].isdigit():
                i += 1
                while i < n and text[i].isdigit():
                    i += 1
        else:
            i += 1
        surface = text[start:i]
        tokens.append(Token(surface, offset + start, offset + i, token_shape(surface)))
    return tokens


_LABEL_RE = re.compile(r"^\s*(\d+\.)\s+")


def _is_split_point(text: str, dot: int, seg_start: int, exceptions: frozenset) -> bool:
    """Decide whether the full stop at ``dot`` ends the current segment."""
    j = dot + 1
    n = len(text)
    while j < n and text[j].isspace():
        j += 1
    if j == dot + 1 or j >= n:
        # not followed by whitespace: never a boundary; end of text handled outside
        return False
    nxt = text[j]
    if not (nxt.isupper() or nxt.isdigit()):
        return False
    # token directly before the dot
    k = dot
    while k > seg_start and not text[k - 1].isspace():
        k -= 1
    before = text[k:dot]
    if before.isdigit() and not text[seg_start:k].strip():
        # enumeration label opening the segment
        return False
    if before in exceptions and nxt.isdigit():
        # run-on measurement record ("135 g. 4 cm"), but a following
        # enumeration label ("g. 25. Leber") still closes the segment
        m = j
        while m < n and text[m].isdigit():
            m += 1
        if m < n and text[m] == ".":
            return True
        return False
    return True


def segment_document(raw: RawCorpusFile, split_exceptions=DEFAULT_SPLIT_EXCEPTIONS) -> Document:
    """Split a corpus file into labelled segments and tokenize each one.

    Every non-whitespace character lands in exactly one segment; segments are
    ordered by start offset. Segment kind starts TELEGRAPHIC and is revised
    after tagging (a finite verb reading flips it to SENTENCE).
    """
    text = raw.text
    exceptions = frozenset(split_exceptions)
    boundaries = []
    seg_start = 0
    for m in re.finditer(r"\.", text):
        if _is_split_point(text, m.start(), seg_start, exceptions):
            boundaries.append(m.end())
            seg_start = m.end()
    boundaries.append(len(text))

    doc = Document(source=raw.name, text=text)
    prev = 0
    index = 0
    for bound in boundaries:
        chunk = text[prev:bound]
        if chunk.strip():
            start = prev + (len(chunk) - len(chunk.lstrip()))
            end = prev + len(chunk.rstrip())
            label = None
            body_start = start
            lm = _LABEL_RE.match(text[start:end])
            if lm:
                label = lm.group(1)
                body_start = start + lm.end()
            tokens = tokenize(text[body_start:end], offset=body_start)
            if tokens:
                doc.segments.append(
                    Segment(index=index, start=start, end=end, tokens=tokens, label=label)
                )
                index += 1
        prev = bound
    return doc


def load_corpus(directory: str | Path, pattern: str = "*.txt") -> list[RawCorpusFile]:
    """Read corpus files in deterministic (sorted) order."""
    directory = Path(directory)
    files = sorted(p for p in directory.glob(pattern) if p.is_file())
    out = []
    for path in files:
        text = path.read_text(encoding="utf-8")
        if text.strip():
            out.append(RawCorpusFile(path=str(path), name=path.name, text=text))
    if not out:
        raise EmptyCorpus("no non-empty %s files under %s" % (pattern, directory))
    return out

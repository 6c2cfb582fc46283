"""Tokenizer and segmenter behavior on telegraphic record text."""

import random

import pytest

from sublex.docmodel import (
    DEFAULT_SPLIT_EXCEPTIONS,
    EmptyCorpus,
    RawCorpusFile,
    Shape,
    load_corpus,
    segment_document,
    token_shape,
    tokenize,
)


def doc(text, exceptions=DEFAULT_SPLIT_EXCEPTIONS):
    return segment_document(RawCorpusFile("mem", "mem.txt", text), exceptions)


def seg_texts(document):
    return [document.text[s.start:s.end] for s in document.segments]


def test_token_shapes():
    assert token_shape("Leber") is Shape.WORD_UPPER_INIT
    assert token_shape("frei") is Shape.WORD_LOWER
    assert token_shape("135") is Shape.NUMBER
    assert token_shape("1,5") is Shape.NUMBER
    assert token_shape(".") is Shape.PUNCT
    assert token_shape("B12") is Shape.MIXED


def test_hyphen_compound_is_one_token():
    tokens = tokenize("weisslich-gelblich-verfaerbt.")
    assert [t.surface for t in tokens] == ["weisslich-gelblich-verfaerbt", "."]
    assert tokens[0].shape is Shape.WORD_LOWER


def test_dangling_hyphen_stays_punct():
    tokens = tokenize("Wangen- und Kinnpartie")
    assert [t.surface for t in tokens] == ["Wangen", "-", "und", "Kinnpartie"]


def test_decimal_comma_number():
    tokens = tokenize("Niere 1,5 cm.")
    assert [t.surface for t in tokens] == ["Niere", "1,5", "cm", "."]


def test_token_spans_index_source_text():
    text = "  Harnblase  leer. "
    for token in tokenize(text):
        assert text[token.start:token.end] == token.surface


def test_basic_record_split():
    d = doc("Harnblase leer. Harnleiter frei.")
    assert seg_texts(d) == ["Harnblase leer.", "Harnleiter frei."]


def test_split_needs_upper_or_digit_after_dot():
    d = doc("Harnblase leer. und sonst nichts.")
    assert seg_texts(d) == ["Harnblase leer. und sonst nichts."]


def test_enumeration_label_attached_to_body():
    d = doc("24. Hirngewicht 1490 g.")
    assert len(d.segments) == 1
    seg = d.segments[0]
    assert seg.label == "24."
    assert [t.surface for t in seg.tokens][0] == "Hirngewicht"


def test_unit_abbreviation_keeps_runon_measurements_together():
    d = doc("Gewicht 135 g. 11 cm lang.")
    assert seg_texts(d) == ["Gewicht 135 g. 11 cm lang."]


def test_unit_before_new_label_still_splits():
    d = doc("Hirngewicht 1490 g. 25. Leber unauffaellig.")
    assert seg_texts(d) == ["Hirngewicht 1490 g.", "25. Leber unauffaellig."]
    assert d.segments[1].label == "25."


def test_unit_before_capital_word_splits():
    d = doc("Hirngewicht 1490 g. Windungen abgeflacht.")
    assert seg_texts(d) == ["Hirngewicht 1490 g.", "Windungen abgeflacht."]


def test_every_character_lands_in_order():
    d = doc("Harnblase leer. 24. Gewicht 135 g. Niere glatt.\nMund geoeffnet.")
    starts = [s.start for s in d.segments]
    assert starts == sorted(starts)
    for a, b in zip(d.segments, d.segments[1:]):
        assert a.end <= b.start


def test_tokens_never_cross_segments_random_texts():
    rng = random.Random(7)
    words = ["Leber", "frei", "g", "Gewicht", "135", "24.", "glatt."]
    for _ in range(200):
        text = " ".join(rng.choice(words) for _ in range(rng.randint(1, 12)))
        d = doc(text)
        for seg in d.segments:
            for token in seg.tokens:
                assert seg.start <= token.start <= token.end <= seg.end
                assert d.text[token.start:token.end] == token.surface
        # no character may vanish; labels live on the segment, not in tokens
        kept = "".join(t.surface for s in d.segments for t in s.tokens)
        kept += "".join(s.label or "" for s in d.segments)
        expect = "".join(ch for ch in text if not ch.isspace())
        assert sorted(kept) == sorted(expect)


def test_load_corpus_sorted_and_empty_error(tmp_path):
    (tmp_path / "b.txt").write_text("Niere glatt.", encoding="utf-8")
    (tmp_path / "a.txt").write_text("Leber frei.", encoding="utf-8")
    (tmp_path / "skip.md").write_text("nope", encoding="utf-8")
    names = [f.name for f in load_corpus(tmp_path)]
    assert names == ["a.txt", "b.txt"]
    with pytest.raises(EmptyCorpus):
        load_corpus(tmp_path, pattern="*.missing")


def test_empty_files_are_skipped(tmp_path):
    (tmp_path / "a.txt").write_text("", encoding="utf-8")
    (tmp_path / "b.txt").write_text("Leber frei.", encoding="utf-8")
    assert [f.name for f in load_corpus(tmp_path)] == ["b.txt"]

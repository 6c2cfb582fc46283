"""Measurement extraction: compound splits, focus resolution, error cases,
and per-unit ranges."""

import pytest

from sublex.docmodel import RawCorpusFile, segment_document
from sublex.measurements import (
    FocusRegister,
    FocusUnresolved,
    Measurement,
    MeasurementOrigin,
    MeasureTable,
    NoData,
    NotAMeasurement,
    extract_measurement,
    property_range,
)
from sublex.relations import Evidence

EV = Evidence("doc", 0)


@pytest.fixture(scope="module")
def table():
    from conftest import RESOURCES

    return MeasureTable.from_path(RESOURCES / "measures.txt")


def tag_line(tagger, text):
    d = segment_document(RawCorpusFile("mem", "mem.txt", text))
    assert len(d.segments) == 1
    return tagger.tag_segment(d.segments[0])


def test_compound_head_split(tagger, table):
    m = extract_measurement(tag_line(tagger, "Lebergewicht 1780 g."), table, FocusRegister(), EV)
    assert m.entity == "Leber"
    assert m.prop == "Gewicht"
    assert m.value == 1780.0
    assert m.unit == "g"
    assert m.origin is MeasurementOrigin.COMPOUND_SPLIT


def test_compound_split_capitalizes_remainder(tagger, table):
    m = extract_measurement(tag_line(tagger, "Hirngewicht 1490 g."), table, FocusRegister(), EV)
    assert (m.entity, m.prop) == ("Hirn", "Gewicht")


def test_generic_head_resolves_against_focus(tagger, table):
    focus = FocusRegister()
    focus.update("Niere")
    m = extract_measurement(tag_line(tagger, "Gewicht 135 g."), table, focus, EV)
    assert m.entity == "Niere"
    assert m.prop == "Gewicht"
    assert m.origin is MeasurementOrigin.FOCUS


def test_generic_head_without_focus_raises(tagger, table):
    with pytest.raises(FocusUnresolved):
        extract_measurement(tag_line(tagger, "Gewicht 135 g."), table, FocusRegister(), EV)


def test_decimal_comma_value(tagger, table):
    focus = FocusRegister()
    focus.update("Milz")
    m = extract_measurement(tag_line(tagger, "Laenge 11,5 cm."), table, focus, EV)
    assert m.value == 11.5
    assert m.value_text == "11,5"
    assert m.unit == "cm"


def test_number_must_be_followed_by_unit(tagger, table):
    focus = FocusRegister()
    focus.update("Niere")
    with pytest.raises(NotAMeasurement):
        extract_measurement(tag_line(tagger, "Gewicht 135 betraegt."), table, focus, EV)


def test_plain_sentence_is_not_a_measurement(tagger, table):
    with pytest.raises(NotAMeasurement):
        extract_measurement(tag_line(tagger, "Harnblase leer."), table, FocusRegister(), EV)


def test_unknown_head_is_not_a_measurement(tagger, table):
    # noun head that is neither compound nor a generic head
    with pytest.raises(NotAMeasurement):
        extract_measurement(tag_line(tagger, "Erweiterung 135 g."), table, FocusRegister(), EV)


def test_unit_token_cannot_be_the_head(tagger, table):
    # even with a noun reading, a unit token is skipped by the head search,
    # so the following generic head still wins
    from sublex.tagging import CompositeLexicon, Source, TextLexicon

    lex = CompositeLexicon(TextLexicon.parse("cm N\n", Source.LEXICON))
    focus = FocusRegister()
    focus.update("Niere")
    d = segment_document(RawCorpusFile("mem", "mem.txt", "cm Laenge 11 cm."))
    tagged = tagger.tag_segment(d.segments[0], lexicon=lex)
    m = extract_measurement(tagged, table, focus, EV)
    assert (m.entity, m.prop, m.value) == ("Niere", "Laenge", 11.0)


def test_focus_register_cycle():
    focus = FocusRegister()
    assert focus.entity is None
    focus.update("Leber")
    focus.update("Niere")
    assert focus.entity == "Niere"
    focus.clear()
    assert focus.entity is None


def mk(entity, prop, value, unit):
    return Measurement(entity, prop, value, str(value), unit, MeasurementOrigin.FOCUS, EV)


def test_property_range_basic():
    ms = [mk("Niere", "Gewicht", v, "g") for v in (180.0, 135.0, 270.0)]
    assert property_range(ms, "Niere", "Gewicht") == (135.0, 270.0, 3)


def test_property_range_is_unit_segregated():
    ms = [mk("Niere", "Gewicht", 135.0, "g"), mk("Niere", "Gewicht", 0.2, "kg")]
    with pytest.raises(NoData):
        property_range(ms, "Niere", "Gewicht")
    assert property_range(ms, "Niere", "Gewicht", unit="g") == (135.0, 135.0, 1)
    assert property_range(ms, "Niere", "Gewicht", unit="kg") == (0.2, 0.2, 1)


def test_property_range_no_data():
    with pytest.raises(NoData):
        property_range([], "Niere", "Gewicht")


def test_measure_table_parse_errors():
    with pytest.raises(ValueError):
        MeasureTable.parse("unit\n")
    with pytest.raises(ValueError):
        MeasureTable.parse("suffix gewicht\n")
    with pytest.raises(ValueError):
        MeasureTable.parse("nonsense line here\n")


def test_measure_table_parse_shape():
    t = MeasureTable.parse("unit g\nsuffix Gewicht Gewicht\ngeneric Laenge Laenge\n# c\n")
    assert t.units == frozenset({"g"})
    # suffixes are matched case-insensitively, stored lowercased
    assert t.suffixes == {"gewicht": "Gewicht"}
    assert t.generics == {"Laenge": "Laenge"}

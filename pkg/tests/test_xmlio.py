"""Canonical XML: export/import byte round-trips, attribute discipline,
escaping, and the store archive format."""

import random

import pytest

from sublex.cooccurrence import Cluster
from sublex.docmodel import RawCorpusFile, segment_document
from sublex.measurements import Measurement, MeasurementOrigin
from sublex.ontology import FactKind, OntologyFact
from sublex.relations import Evidence, RelationTable, match_patterns
from sublex.store import KnowledgeStore
from sublex.xmlio import (
    DocumentAnalysis,
    LayerMissing,
    SegmentAnalysis,
    _fmt_attrs,
    export_clusters_xml,
    export_document_xml,
    export_inventories_xml,
    export_ontology_xml,
    export_relations_tsv,
    export_relations_xml,
    export_store_xml,
    import_ontology_xml,
    import_store_xml,
    import_xml,
)

ALL_LAYERS = ("POS", "PARSE", "RELATION")


def analyze(tagger, parser, patterns, exceptions, grammar, text, source="mem.txt"):
    doc = segment_document(RawCorpusFile("mem", source, text))
    rule_types = {r.name: r.node_type for r in grammar.rules if r.node_type}
    analysis = DocumentAnalysis(doc=doc, segments=[], rule_types=rule_types)
    for seg in doc.segments:
        tagged = tagger.tag_segment(seg)
        result = parser.parse(tagged)
        extraction = match_patterns(result, patterns, exceptions)
        analysis.segments.append(
            SegmentAnalysis(segment=seg, tagged=tagged, parse=result,
                            extraction=extraction)
        )
    return analysis


def roundtrip(xml_text):
    analysis, layers = import_xml(xml_text)
    return export_document_xml(analysis, layers=sorted(layers))


def test_document_roundtrip_bytes(tagger, parser, patterns, exceptions, grammar):
    text = ("Harnblase leer. Gangsysteme sind frei.\n"
            "Rippen und Wirbelsaeule intakt.\n"
            "Beckengeruest festgefuegt und unversehrt.\n"
            "Blutanhaftungen an der Gekroesewurzel.\n")
    analysis = analyze(tagger, parser, patterns, exceptions, grammar, text)
    xml_text = export_document_xml(analysis, layers=ALL_LAYERS)
    assert xml_text.startswith('<?xml version="1.0" encoding="UTF-8"?>\n<DOC')
    assert roundtrip(xml_text) == xml_text


def test_partial_parse_roundtrip(tagger, parser, patterns, exceptions, grammar):
    analysis = analyze(tagger, parser, patterns, exceptions, grammar, "der an ohne.")
    xml_text = export_document_xml(analysis, layers=ALL_LAYERS)
    assert 'STATUS="PARTIAL"' in xml_text
    assert "<COVER>" in xml_text
    assert roundtrip(xml_text) == xml_text


def test_labeled_segment_roundtrip(tagger, parser, patterns, exceptions, grammar):
    analysis = analyze(tagger, parser, patterns, exceptions, grammar,
                       "24. Hirngewicht 1490 g.")
    xml_text = export_document_xml(analysis, layers=ALL_LAYERS)
    assert 'LABEL="24."' in xml_text
    assert roundtrip(xml_text) == xml_text


def test_measurement_element_roundtrip(tagger, parser, patterns, exceptions, grammar):
    analysis = analyze(tagger, parser, patterns, exceptions, grammar,
                       "Lebergewicht 1780 g.")
    analysis.segments[0].measurement = Measurement(
        "Leber", "Gewicht", 1780.0, "1780", "g",
        MeasurementOrigin.COMPOUND_SPLIT, Evidence("mem.txt", 0),
    )
    xml_text = export_document_xml(analysis, layers=ALL_LAYERS)
    assert "<MEASURE" in xml_text
    assert roundtrip(xml_text) == xml_text
    back, _ = import_xml(xml_text)
    m = back.segments[0].measurement
    assert (m.entity, m.prop, m.value, m.unit) == ("Leber", "Gewicht", 1780.0, "g")
    assert m.origin is MeasurementOrigin.COMPOUND_SPLIT


def test_randomized_document_roundtrips(tagger, parser, patterns, exceptions, grammar):
    rng = random.Random(77)
    words = ["Harnblase", "leer", "frei", "glatt", "der", "die", "das", "und",
             "sind", "ist", "an", "in", "auf", "kein", "nicht", "sehr",
             "Erweiterung", "Blutanhaftungen", "Niere", "Gewicht", "135",
             "11,5", "g", "cm", "intakt", "Wirbelsaeule", "Abc-def",
             "Mundhoehle", "unversehrt"]
    for _ in range(40):
        sentences = []
        for _s in range(rng.randint(1, 5)):
            n = rng.randint(1, 7)
            parts = [rng.choice(words) for _ in range(n)]
            if rng.random() < 0.3:
                parts.insert(rng.randrange(len(parts) + 1), ",")
            sentences.append(" ".join(parts) + ".")
        text = "\n".join(sentences) + "\n"
        analysis = analyze(tagger, parser, patterns, exceptions, grammar, text)
        xml_text = export_document_xml(analysis, layers=ALL_LAYERS)
        assert roundtrip(xml_text) == xml_text, "roundtrip drift for %r" % text


def test_layers_subset_and_errors(tagger, parser, patterns, exceptions, grammar):
    analysis = analyze(tagger, parser, patterns, exceptions, grammar, "Harnblase leer.")
    bare = export_document_xml(analysis)
    assert "<POS>" not in bare and "<PARSE" not in bare and "RELATION" not in bare
    _, layers = import_xml(bare)
    assert layers == frozenset()

    with pytest.raises(ValueError):
        export_document_xml(analysis, layers=("POS", "WRONG"))

    doc = segment_document(RawCorpusFile("mem", "mem.txt", "Harnblase leer."))
    untagged = DocumentAnalysis(
        doc=doc, segments=[SegmentAnalysis(segment=s) for s in doc.segments])
    with pytest.raises(LayerMissing):
        export_document_xml(untagged, layers=("POS",))
    with pytest.raises(LayerMissing):
        export_document_xml(untagged, layers=("PARSE",))


def test_attribute_order_is_closed():
    with pytest.raises(ValueError):
        _fmt_attrs({"BOGUS": "1"})
    # canonical order, not insertion order
    assert _fmt_attrs({"RULE": "NP1", "TYPE": "FULL"}) == ' TYPE="FULL" RULE="NP1"'


def test_text_escaping_roundtrip(tagger, parser, patterns, exceptions, grammar):
    # document text goes out verbatim (escaped) and comes back identical,
    # including characters XML parsers like to normalize
    text = 'Harnblase <leer> & "gut".\tTab und\r\nZeilen.\n'
    doc = segment_document(RawCorpusFile("mem", "mem.txt", text))
    analysis = DocumentAnalysis(
        doc=doc, segments=[SegmentAnalysis(segment=s) for s in doc.segments])
    xml_text = export_document_xml(analysis)
    back, _ = import_xml(xml_text)
    assert back.doc.text == text
    assert roundtrip(xml_text) == xml_text


def test_relations_export_shape():
    table = RelationTable()
    ev = Evidence("d.txt", 0)
    table.add("Harnblase", "leer", ev)
    table.add("Beckengeruest", "festgefuegt", ev)
    table.add("Beckengeruest", "unversehrt", ev)
    xml_text = export_relations_xml(table)
    assert xml_text == (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        '<RELATIONS VERSION="1">\n'
        '  <RATT-V><ENTITY>Harnblase</ENTITY><VALUE CNT="1">leer</VALUE></RATT-V>\n'
        '  <RATT-V><ENTITY>Beckengeruest</ENTITY><VALUE CNT="1">festgefuegt</VALUE>'
        '<VALUE CNT="1">unversehrt</VALUE></RATT-V>\n'
        "</RELATIONS>\n"
    )
    tsv = export_relations_tsv(table)
    lines = tsv.splitlines()
    assert lines[0] == "entity\tvalue\tcount\tevidence"
    assert "Harnblase\tleer\t1\td.txt:0" in lines


def test_clusters_and_inventories_export_shape():
    xml_text = export_clusters_xml([
        Cluster("frei", "value", ("Harnleiter", "Gangsysteme"), ("frei",), 1)
    ])
    assert '<CLUSTER KIND="value" SEED="frei" ROUNDS="1">' in xml_text
    assert "<ENTITY>Harnleiter</ENTITY>" in xml_text
    inv = export_inventories_xml([("Harte Hirnhaut", [("intakt", 3), ("grauweiss", 1)])])
    assert '<INVENTORY ENTITY="Harte Hirnhaut">' in inv
    assert '<VALUE CNT="3">intakt</VALUE>' in inv


def test_ontology_xml_roundtrip():
    rows = [
        (OntologyFact(FactKind.PART_OF, "Schleimhaut", "Magen",
                      note="genitive NP (reconstructed trigger)",
                      evidence=(Evidence("a.txt", 1),), count=2),
         "SUGGESTED", [Evidence("a.txt", 1)]),
        (OntologyFact(FactKind.VALUE_RANGE, "Niere", "Gewicht",
                      payload=(135.0, 270.0, "g"), note="n=3",
                      evidence=(Evidence("m.txt", 1),), count=3),
         "ACCEPTED", [Evidence("m.txt", 1)]),
        (OntologyFact(FactKind.CONCEPT, "harte Hirnhaut", "", note=""),
         "SUGGESTED", []),
    ]
    xml_text = export_ontology_xml(rows)
    back = import_ontology_xml(xml_text)
    assert export_ontology_xml(back) == xml_text
    fact, status, evidence = back[1]
    assert fact.payload == (135.0, 270.0, "g")
    assert status == "ACCEPTED"
    assert evidence == [Evidence("m.txt", 1)]
    # CONCEPT facts have no object element
    assert back[2][0].object == ""


def test_import_rejects_foreign_roots():
    with pytest.raises(ValueError):
        import_xml('<?xml version="1.0" encoding="UTF-8"?>\n<WRONG/>\n')
    with pytest.raises(ValueError):
        import_ontology_xml('<?xml version="1.0" encoding="UTF-8"?>\n<WRONG/>\n')
    with pytest.raises(ValueError):
        import_store_xml('<?xml version="1.0" encoding="UTF-8"?>\n<WRONG/>\n',
                         "unused.jsonl")


def populated_store(tmp_path):
    from sublex.features import parse_bundle
    from sublex.store import EntryOrigin, LexiconEntry
    from sublex.tagging import POSClass

    store = KnowledgeStore(tmp_path / "store.jsonl",
                           clock=lambda: "2026-08-17T00:00:00+00:00")
    run = store.open_run("corpushash", "confighash")
    entry = LexiconEntry("frei", POSClass.ADJ, parse_bundle("_", "_", "_"),
                         origin=EntryOrigin.PARSER_AS)
    (sid,) = store.record_suggestions(run, [("LEXICON", entry, [Evidence("a.txt", 0)])])
    store.record_suggestions(run, [("LEXICON", entry, [Evidence("a.txt", 2)])])
    store.record_suggestions(
        run,
        [("ONTOLOGY",
          OntologyFact(FactKind.VALUE_RANGE, "Niere", "Gewicht",
                       payload=(135.0, 270.0, "g"), note="n=3"),
          [Evidence("m.txt", 1)])],
    )
    store.decide(sid, "ACCEPT", who="rev")
    store.add_value_group("Durchgaengigkeit", ["frei", "leer"], "", who="rev")
    store.close_run(run, {"segments": 4, "full_ratio": 0.75})
    return store


def test_store_archive_roundtrip(tmp_path):
    store = populated_store(tmp_path)
    xml_text = export_store_xml(store)
    restored = import_store_xml(xml_text, tmp_path / "restored.jsonl")
    assert {s.id: (s.kind, s.status, s.count, tuple(s.evidence))
            for s in restored.suggestions()} == \
           {s.id: (s.kind, s.status, s.count, tuple(s.evidence))
            for s in store.suggestions()}
    assert [(r.id, r.corpus_hash, r.coverage) for r in restored.runs()] == \
           [(r.id, r.corpus_hash, r.coverage) for r in store.runs()]
    # archive of the restored store is byte-identical to the original archive
    assert export_store_xml(restored) == xml_text

"""Canonical XML serialization for every artifact the pipeline writes.

The writer is hand-rolled on purpose: attribute order, indentation and
escaping are pinned down so identical inputs give byte-identical files,
which the golden tests and the determinism check compare directly. Imports
go through xml.etree; export(import(x)) == x on the bytes.

Attribute order follows one global ranking (the tree/relation vocabulary
first: TYPE, RULE, CAS, NUM, GEN, SRC, AS, CNT - then the bookkeeping
attributes). An attribute outside the ranking is a programming error.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from .cooccurrence import Cluster
from .docmodel import Document, Segment, SegmentKind, Shape, Token
from .features import parse_bundle
from .measurements import Measurement, MeasurementOrigin, _number_value
from .ontology import OntologyFact, FactKind, format_number
from .parser import ParseNode, ParseResult
from .relations import Emission, Evidence, RelationTable, SegmentExtraction
from .tagging import POSClass, POSReading, Source, TaggedToken

XML_DECL = '<?xml version="1.0" encoding="UTF-8"?>\n'
FORMAT_VERSION = "1"

ATTR_ORDER = (
    "TYPE", "RULE", "CAS", "NUM", "GEN", "SRC", "AS", "CNT",
    "INDEX", "START", "END", "SHAPE", "KIND", "LABEL", "SOURCE", "STATUS",
    "LEMMA", "CLS", "ORIGIN", "ENTITY", "PROP", "VALUE", "UNIT",
    "MIN", "MAX", "N", "NOTE", "SEED", "ROUNDS", "DOC", "SEGMENT",
    "ID", "RUN", "VERDICT", "WHO", "AT", "CORPUS", "CONFIG", "KEY",
    "COUNT", "FORMAT", "VERSION",
)
_ATTR_RANK = {name: i for i, name in enumerate(ATTR_ORDER)}


class LayerMissing(ValueError):
    """A requested export layer was not computed for this document."""


@dataclass
class SegmentAnalysis:
    """Everything the pipeline computed for one segment."""

    segment: Segment
    tagged: list[TaggedToken] | None = None
    parse: ParseResult | None = None
    extraction: SegmentExtraction | None = None
    measurement: Measurement | None = None


@dataclass
class DocumentAnalysis:
    doc: Document
    segments: list[SegmentAnalysis]
    # rule name -> TYPE attribute (FULL/COMPLEX), from the grammar
    rule_types: dict[str, str] = field(default_factory=dict)


# -- writer ---------------------------------------------------------------------

def _esc_text(text: str) -> str:
    # carriage returns must be character references or the parser folds them
    out = text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    return out.replace("\r", "&#13;")


def _esc_attr(text: str) -> str:
    # attribute-value normalization would turn raw whitespace into spaces
    out = _esc_text(text).replace('"', "&quot;")
    return out.replace("\n", "&#10;").replace("\t", "&#9;")


def _fmt_attrs(attrs: dict) -> str:
    items = [(k, v) for k, v in attrs.items() if v is not None]
    for k, _v in items:
        if k not in _ATTR_RANK:
            raise ValueError("attribute %r is not in the canonical order" % k)
    items.sort(key=lambda kv: _ATTR_RANK[kv[0]])
    return "".join(' %s="%s"' % (k, _esc_attr(str(v))) for k, v in items)


def _inline(tag: str, attrs: dict | None = None, text: str | None = None) -> str:
    head = "<%s%s" % (tag, _fmt_attrs(attrs or {}))
    if text is None:
        return head + "/>"
    return "%s>%s</%s>" % (head, _esc_text(text), tag)


class _Writer:
    def __init__(self):
        self.parts: list[str] = [XML_DECL]
        self.depth = 0

    def line(self, content: str):
        self.parts.append("  " * self.depth + content + "\n")

    def open(self, tag: str, attrs: dict | None = None):
        self.line("<%s%s>" % (tag, _fmt_attrs(attrs or {})))
        self.depth += 1

    def close(self, tag: str):
        self.depth -= 1
        self.line("</%s>" % tag)

    def leaf(self, tag: str, attrs: dict | None = None, text: str | None = None):
        self.line(_inline(tag, attrs, text))

    def text(self) -> str:
        return "".join(self.parts)


# -- document export --------------------------------------------------------------

DOCUMENT_LAYERS = ("POS", "PARSE", "RELATION")


def _reading_xml(reading: POSReading) -> str:
    attrs = {
        "CAS": reading.features.format_component("cas"),
        "NUM": reading.features.format_component("num"),
        "GEN": reading.features.format_component("gen"),
        "SRC": reading.src.value,
        "LEMMA": reading.lemma,
    }
    return _inline(reading.cls.value, attrs)


def _node_attrs(node: ParseNode, rule_types: dict) -> dict:
    attrs = {
        "TYPE": rule_types.get(node.rule) if node.rule else None,
        "RULE": node.rule,
        "CAS": node.features.format_component("cas"),
        "NUM": node.features.format_component("num"),
        "GEN": node.features.format_component("gen"),
    }
    if node.is_leaf:
        attrs["SRC"] = node.src
        attrs["AS"] = node.assumed
        attrs["INDEX"] = node.token_index
    return attrs


def _write_node(w: _Writer, node: ParseNode, rule_types: dict):
    if node.is_leaf:
        w.leaf(node.category, _node_attrs(node, rule_types), node.surface)
        return
    w.open(node.category, _node_attrs(node, rule_types))
    for child in node.children:
        _write_node(w, child, rule_types)
    w.close(node.category)


def _rattv_lines(emissions: list[Emission]) -> list[str]:
    """One RATT-V per entity (order preserved), VALUE children inline. The
    pattern lives on the enclosing RELATION element; emissions of one
    segment all come from the one matched pattern."""
    grouped: dict[str, dict[str, int]] = {}
    for e in emissions:
        values = grouped.setdefault(e.entity, {})
        values[e.value] = values.get(e.value, 0) + 1
    lines = []
    for entity, values in grouped.items():
        inner = _inline("ENTITY", None, entity)
        for value, cnt in values.items():
            inner += _inline("VALUE", {"CNT": cnt}, value)
        lines.append("<RATT-V>%s</RATT-V>" % inner)
    return lines


def export_document_xml(analysis: DocumentAnalysis, layers=()) -> str:
    layers = frozenset(layers)
    unknown = layers - frozenset(DOCUMENT_LAYERS)
    if unknown:
        raise ValueError("unknown layers: %s" % ", ".join(sorted(unknown)))
    for name, attr in (("POS", "tagged"), ("PARSE", "parse"), ("RELATION", "extraction")):
        if name in layers:
            for seg in analysis.segments:
                if getattr(seg, attr) is None:
                    raise LayerMissing(name)
    w = _Writer()
    w.open("DOC", {"SOURCE": analysis.doc.source, "VERSION": FORMAT_VERSION})
    w.leaf("TEXT", None, analysis.doc.text)
    for seg in analysis.segments:
        s = seg.segment
        w.open("SEGMENT", {
            "INDEX": s.index, "START": s.start, "END": s.end,
            "KIND": s.kind.value, "LABEL": s.label,
        })
        for i, tok in enumerate(s.tokens):
            w.leaf("TOK", {"INDEX": i, "START": tok.start, "END": tok.end,
                           "SHAPE": tok.shape.value}, tok.surface)
        if "POS" in layers:
            w.open("POS")
            for i, tagged in enumerate(seg.tagged):
                inner = "".join(_reading_xml(r) for r in tagged.readings)
                w.line("<TOKPOS%s>%s</TOKPOS>" % (_fmt_attrs({"INDEX": i}), inner))
            w.close("POS")
        if "PARSE" in layers:
            w.open("PARSE", {"STATUS": seg.parse.kind})
            if seg.parse.is_full:
                for tree in seg.parse.trees:
                    w.open("TREE")
                    _write_node(w, tree, analysis.rule_types)
                    w.close("TREE")
            else:
                w.open("COVER")
                for node in seg.parse.trees:
                    _write_node(w, node, analysis.rule_types)
                w.close("COVER")
            w.close("PARSE")
        if "RELATION" in layers:
            ext = seg.extraction
            attrs = {"RULE": ext.pattern if ext.matched else None}
            if ext.emissions or seg.measurement is not None:
                w.open("RELATION", attrs)
                for line in _rattv_lines(ext.emissions):
                    w.line(line)
                if seg.measurement is not None:
                    m = seg.measurement
                    w.leaf("MEASURE", {
                        "ENTITY": m.entity, "PROP": m.prop, "VALUE": m.value_text,
                        "UNIT": m.unit, "SRC": m.origin.value,
                    })
                w.close("RELATION")
            else:
                w.leaf("RELATION", attrs)
        w.close("SEGMENT")
    w.close("DOC")
    return w.text()


# -- document import ---------------------------------------------------------------

def _features_from(el: ET.Element):
    return parse_bundle(el.get("CAS", "_"), el.get("NUM", "_"), el.get("GEN", "_"))


def _import_node(el: ET.Element, rule_types: dict) -> ParseNode:
    rule = el.get("RULE")
    if rule and el.get("TYPE"):
        rule_types[rule] = el.get("TYPE")
    index = el.get("INDEX")
    if index is not None:
        category = el.tag
        assumed = el.get("AS")
        if assumed:
            reading_cls = POSClass.XXX.value
        elif category in ("FS", "COMMA"):
            reading_cls = POSClass.PUNCT.value
        else:
            reading_cls = category
        i = int(index)
        return ParseNode(
            category=category, features=_features_from(el),
            start=i, end=i + 1, rule=rule,
            token_index=i, surface=el.text or "",
            reading_cls=reading_cls, src=el.get("SRC"), assumed=assumed,
        )
    children = tuple(_import_node(c, rule_types) for c in el)
    return ParseNode(
        category=el.tag, features=_features_from(el),
        start=children[0].start if children else 0,
        end=children[-1].end if children else 0,
        rule=rule, children=children,
    )


def import_xml(text: str) -> tuple[DocumentAnalysis, frozenset]:
    """Rebuild a DocumentAnalysis from exported XML. Imported parse trees
    carry no pre-narrowing reading features (those are not serialized), so
    they are for display and re-export, not for feature derivation."""
    root = ET.fromstring(text)
    if root.tag != "DOC":
        raise ValueError("not a document file: root element %r" % root.tag)
    source = root.get("SOURCE", "")
    doc_text = root.findtext("TEXT") or ""
    doc = Document(source=source, text=doc_text, segments=[])
    analysis = DocumentAnalysis(doc=doc, segments=[])
    layers = set()
    for seg_el in root.iter("SEGMENT"):
        tokens = []
        for tok_el in seg_el.iter("TOK"):
            tokens.append(Token(
                surface=tok_el.text or "",
                start=int(tok_el.get("START")), end=int(tok_el.get("END")),
                shape=Shape(tok_el.get("SHAPE")),
            ))
        segment = Segment(
            index=int(seg_el.get("INDEX")),
            start=int(seg_el.get("START")), end=int(seg_el.get("END")),
            tokens=tokens, label=seg_el.get("LABEL"),
            kind=SegmentKind(seg_el.get("KIND")),
        )
        doc.segments.append(segment)
        seg_analysis = SegmentAnalysis(segment=segment)

        pos_el = seg_el.find("POS")
        if pos_el is not None:
            layers.add("POS")
            tagged = []
            for i, tp in enumerate(pos_el.iter("TOKPOS")):
                readings = tuple(
                    POSReading(
                        cls=POSClass(r.tag), features=_features_from(r),
                        src=Source(r.get("SRC")), lemma=r.get("LEMMA"),
                    )
                    for r in tp
                )
                tagged.append(TaggedToken(token=tokens[i], readings=readings))
            seg_analysis.tagged = tagged

        parse_el = seg_el.find("PARSE")
        if parse_el is not None:
            layers.add("PARSE")
            status = parse_el.get("STATUS")
            trees = []
            if status == "FULL":
                for tree_el in parse_el.iter("TREE"):
                    trees.append(_import_node(tree_el[0], analysis.rule_types))
            else:
                cover = parse_el.find("COVER")
                if cover is not None:
                    trees = [_import_node(c, analysis.rule_types) for c in cover]
            seg_analysis.parse = ParseResult(status, trees)

        rel_el = seg_el.find("RELATION")
        if rel_el is not None:
            layers.add("RELATION")
            pattern = rel_el.get("RULE")
            emissions = []
            for rv in rel_el.iter("RATT-V"):
                entity = rv.findtext("ENTITY") or ""
                for val_el in rv.iter("VALUE"):
                    for _ in range(int(val_el.get("CNT", "1"))):
                        emissions.append(Emission(
                            pattern=pattern or "", entity=entity,
                            value=val_el.text or "", entity_node=None,
                        ))
            seg_analysis.extraction = SegmentExtraction(
                matched=pattern is not None, pattern=pattern, emissions=emissions,
            )
            m_el = rel_el.find("MEASURE")
            if m_el is not None:
                value_text = m_el.get("VALUE")
                seg_analysis.measurement = Measurement(
                    entity=m_el.get("ENTITY"), prop=m_el.get("PROP"),
                    value=_number_value(value_text), value_text=value_text,
                    unit=m_el.get("UNIT"),
                    origin=MeasurementOrigin(m_el.get("SRC")),
                    evidence=Evidence(doc=source, segment=segment.index),
                )
        analysis.segments.append(seg_analysis)
    return analysis, frozenset(layers)


# -- corpus-level exports ------------------------------------------------------------

def export_relations_xml(table: RelationTable) -> str:
    w = _Writer()
    w.open("RELATIONS", {"VERSION": FORMAT_VERSION})
    for row in table.rows.values():
        inner = _inline("ENTITY", None, row.entity)
        for value, cnt in row.values.items():
            inner += _inline("VALUE", {"CNT": cnt}, value)
        w.line("<RATT-V>%s</RATT-V>" % inner)
    w.close("RELATIONS")
    return w.text()


def export_relations_tsv(table: RelationTable) -> str:
    lines = ["entity\tvalue\tcount\tevidence"]
    for row in table.rows.values():
        refs = ";".join("%s:%d" % (e.doc, e.segment) for e in row.evidence)
        for value, cnt in row.values.items():
            lines.append("%s\t%s\t%d\t%s" % (row.entity, value, cnt, refs))
    return "\n".join(lines) + "\n"


def export_clusters_xml(clusters: list[Cluster]) -> str:
    w = _Writer()
    w.open("CLUSTERS", {"VERSION": FORMAT_VERSION})
    for cluster in clusters:
        w.open("CLUSTER", {"SEED": cluster.seed, "KIND": cluster.seed_kind,
                           "ROUNDS": cluster.rounds})
        for entity in cluster.entities:
            w.leaf("ENTITY", None, entity)
        for value in cluster.values:
            w.leaf("VALUE", None, value)
        w.close("CLUSTER")
    w.close("CLUSTERS")
    return w.text()


def export_inventories_xml(inventories: list[tuple[str, list[tuple[str, int]]]]) -> str:
    w = _Writer()
    w.open("INVENTORIES", {"VERSION": FORMAT_VERSION})
    for entity, rows in inventories:
        w.open("INVENTORY", {"ENTITY": entity})
        for value, cnt in rows:
            w.leaf("VALUE", {"CNT": cnt}, value)
        w.close("INVENTORY")
    w.close("INVENTORIES")
    return w.text()


def export_ontology_xml(rows: list[tuple[OntologyFact, str, list[Evidence]]]) -> str:
    """rows: (fact, status, evidence). Status comes from the suggestion
    lifecycle, facts themselves are payloads."""
    w = _Writer()
    w.open("ONTOLOGY", {"VERSION": FORMAT_VERSION})
    for fact, status, evidence in rows:
        w.open("FACT", {"TYPE": fact.kind.value, "STATUS": status,
                        "NOTE": fact.note or None, "CNT": fact.count})
        w.leaf("SUBJECT", None, fact.subject)
        if fact.object:
            w.leaf("OBJECT", None, fact.object)
        if fact.payload is not None:
            lo, hi, unit = fact.payload
            w.leaf("RANGE", {"MIN": format_number(lo), "MAX": format_number(hi),
                             "UNIT": unit})
        for ref in evidence:
            w.leaf("EVIDENCE", {"DOC": ref.doc, "SEGMENT": ref.segment})
        w.close("FACT")
    w.close("ONTOLOGY")
    return w.text()


def import_ontology_xml(text: str) -> list[tuple[OntologyFact, str, list[Evidence]]]:
    root = ET.fromstring(text)
    if root.tag != "ONTOLOGY":
        raise ValueError("not an ontology file: root element %r" % root.tag)
    rows = []
    for el in root.iter("FACT"):
        rng = el.find("RANGE")
        payload = None
        if rng is not None:
            payload = (float(rng.get("MIN")), float(rng.get("MAX")), rng.get("UNIT"))
        evidence = [Evidence(doc=e.get("DOC"), segment=int(e.get("SEGMENT")))
                    for e in el.iter("EVIDENCE")]
        fact = OntologyFact(
            kind=FactKind(el.get("TYPE")),
            subject=el.findtext("SUBJECT") or "",
            object=el.findtext("OBJECT") or "",
            payload=payload,
            note=el.get("NOTE") or "",
            evidence=tuple(evidence),
            count=int(el.get("CNT", "1")),
        )
        rows.append((fact, el.get("STATUS"), evidence))
    return rows


# -- store archival -------------------------------------------------------------------

def export_store_xml(store) -> str:
    """The full event log as XML; import_store_xml replays it into a new
    store file. Works on any object exposing the store's _events list."""
    w = _Writer()
    w.open("STORE", {"FORMAT": "sublex-store", "VERSION": FORMAT_VERSION})
    for rec in store._events:
        t = rec["t"]
        if t == "run_open":
            w.leaf("EVENT", {"KIND": t, "RUN": rec["run"], "CORPUS": rec["corpus"],
                             "CONFIG": rec["config"], "AT": rec["ts"]})
        elif t == "run_close":
            w.open("EVENT", {"KIND": t, "RUN": rec["run"], "AT": rec["ts"]})
            # sorted so a live store and its reloaded twin archive identically
            for key in sorted(rec["coverage"]):
                w.leaf("METRIC", {"KEY": key, "VALUE": _jsonable_str(rec["coverage"][key])})
            for key in sorted(rec["counts"]):
                w.leaf("COUNT", {"KEY": key, "VALUE": _jsonable_str(rec["counts"][key])})
            w.close("EVENT")
        elif t == "suggest":
            w.open("EVENT", {"KIND": t, "ID": rec["id"], "RUN": rec["run"],
                             "AT": rec["ts"], "COUNT": rec.get("count")})
            w.line(_payload_xml(rec["kind"], rec["payload"]))
            for ref in rec["evidence"]:
                w.leaf("EVIDENCE", {"DOC": ref["doc"], "SEGMENT": ref["segment"]})
            w.close("EVENT")
        elif t == "merge":
            w.open("EVENT", {"KIND": t, "ID": rec["id"], "RUN": rec["run"],
                             "COUNT": rec.get("count", 1)})
            for ref in rec["evidence"]:
                w.leaf("EVIDENCE", {"DOC": ref["doc"], "SEGMENT": ref["segment"]})
            w.close("EVENT")
        elif t == "decide":
            w.leaf("EVENT", {"KIND": t, "ID": rec["id"], "VERDICT": rec["verdict"],
                             "WHO": rec["who"], "AT": rec["ts"]})
        else:
            raise ValueError("unknown event type %r" % t)
    w.close("STORE")
    return w.text()


def _jsonable_str(value) -> str:
    import json

    return json.dumps(value)


def _payload_xml(kind: str, payload: dict) -> str:
    if kind == "LEXICON":
        attrs = {"CLS": payload["cls"], "CAS": payload["cas"], "NUM": payload["num"],
                 "GEN": payload["gen"], "ORIGIN": payload["origin"],
                 "LEMMA": payload.get("lemma")}
        return _inline("LEXENTRY", attrs, payload["surface"])
    if kind == "ONTOLOGY":
        rng = payload.get("range")
        attrs = {"TYPE": payload["fact"], "NOTE": payload.get("note") or None}
        if rng:
            attrs.update({"MIN": _jsonable_str(rng[0]), "MAX": _jsonable_str(rng[1]),
                          "UNIT": rng[2]})
        inner = _inline("SUBJECT", None, payload["subject"])
        if payload.get("object"):
            inner += _inline("OBJECT", None, payload["object"])
        return "<FACT%s>%s</FACT>" % (_fmt_attrs(attrs), inner)
    if kind == "VALUE_GROUP":
        inner = "".join(_inline("VALUE", None, v) for v in payload["values"])
        attrs = {"LABEL": payload["label"], "ENTITY": payload.get("entity") or None}
        return "<GROUP%s>%s</GROUP>" % (_fmt_attrs(attrs), inner)
    raise ValueError("unknown payload kind %r" % kind)


def _payload_from_xml(kind: str, el: ET.Element) -> dict:
    if kind == "LEXICON":
        d = {"surface": el.text or "", "cls": el.get("CLS"), "cas": el.get("CAS"),
             "num": el.get("NUM"), "gen": el.get("GEN"), "origin": el.get("ORIGIN")}
        if el.get("LEMMA"):
            d["lemma"] = el.get("LEMMA")
        return d
    if kind == "ONTOLOGY":
        import json

        d = {"fact": el.get("TYPE"), "subject": el.findtext("SUBJECT") or "",
             "object": el.findtext("OBJECT") or "", "note": el.get("NOTE") or ""}
        if el.get("MIN") is not None:
            d["range"] = [json.loads(el.get("MIN")), json.loads(el.get("MAX")),
                          el.get("UNIT")]
        return d
    if kind == "VALUE_GROUP":
        return {"label": el.get("LABEL"), "entity": el.get("ENTITY") or "",
                "values": [v.text or "" for v in el.iter("VALUE")]}
    raise ValueError("unknown payload kind %r" % kind)


def import_store_xml(text: str, path):
    """Replay an archived store into a fresh store file at `path`."""
    import json

    from .store import STORE_FORMAT, STORE_VERSION, KnowledgeStore

    root = ET.fromstring(text)
    if root.tag != "STORE" or root.get("FORMAT") != STORE_FORMAT:
        raise ValueError("not a store archive")
    records = []
    for el in root.iter("EVENT"):
        t = el.get("KIND")
        if t == "run_open":
            records.append({"t": t, "run": el.get("RUN"), "corpus": el.get("CORPUS"),
                            "config": el.get("CONFIG"), "ts": el.get("AT")})
        elif t == "run_close":
            coverage = {m.get("KEY"): json.loads(m.get("VALUE"))
                        for m in el.iter("METRIC")}
            counts = {c.get("KEY"): json.loads(c.get("VALUE"))
                      for c in el.iter("COUNT")}
            records.append({"t": t, "run": el.get("RUN"), "coverage": coverage,
                            "counts": counts, "ts": el.get("AT")})
        elif t == "suggest":
            payload_el = next(c for c in el if c.tag in ("LEXENTRY", "FACT", "GROUP"))
            kind = {"LEXENTRY": "LEXICON", "FACT": "ONTOLOGY", "GROUP": "VALUE_GROUP"}[payload_el.tag]
            rec = {"t": t, "id": el.get("ID"), "run": el.get("RUN"), "kind": kind,
                   "payload": _payload_from_xml(kind, payload_el),
                   "evidence": [{"doc": e.get("DOC"), "segment": int(e.get("SEGMENT"))}
                                for e in el.iter("EVIDENCE")],
                   "ts": el.get("AT")}
            if el.get("COUNT") is not None:
                rec["count"] = json.loads(el.get("COUNT"))
            records.append(rec)
        elif t == "merge":
            records.append({"t": t, "id": el.get("ID"), "run": el.get("RUN"),
                            "count": json.loads(el.get("COUNT", "1")),
                            "evidence": [{"doc": e.get("DOC"),
                                          "segment": int(e.get("SEGMENT"))}
                                         for e in el.iter("EVIDENCE")]})
        elif t == "decide":
            records.append({"t": t, "id": el.get("ID"), "verdict": el.get("VERDICT"),
                            "who": el.get("WHO"), "ts": el.get("AT")})
        else:
            raise ValueError("unknown event kind %r" % t)
    header = {"t": "header", "format": STORE_FORMAT, "version": STORE_VERSION}
    from pathlib import Path

    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(
        "".join(json.dumps(r, sort_keys=True, ensure_ascii=False) + "\n"
                for r in [header] + records),
        encoding="utf-8",
    )
    return KnowledgeStore(out)

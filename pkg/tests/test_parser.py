"""Chart parser: worked-example goldens, a brute-force oracle over random
segments, partial covers, and feature derivation."""

import random
from dataclasses import dataclass, field

from sublex.docmodel import RawCorpusFile, Shape, Token, segment_document
from sublex.features import COMPONENTS, FeatureBundle, component_domain, parse_bundle
from sublex.parser import ChartParser, ParseNode, derive_features
from sublex.tagging import (
    CompositeLexicon,
    POSClass,
    POSReading,
    Source,
    TaggedToken,
    TextLexicon,
)

EXT_LEXICON = TextLexicon.parse(
    """
    Inhalt       N  NOM|AKK      SG  MAS
    Flachschnitt N  NOM|AKK      SG  MAS
    Gewebe       N  NOM|DAT|AKK  SG  NTR
    """,
    Source.LEXICON,
)


def parse_line(tagger, parser, text, lexicon=None):
    d = segment_document(RawCorpusFile("mem", "mem.txt", text))
    assert len(d.segments) == 1
    tagged = tagger.tag_segment(d.segments[0], lexicon=lexicon)
    return tagged, parser.parse(tagged)


def find_nodes(tree, pred):
    return [n for n in tree.iter_nodes() if pred(n)]


def leaf(tree, surface):
    hits = [l for l in tree.leaves() if l.surface == surface]
    assert hits, "no leaf %r" % surface
    return hits[0]


# - worked-example goldens -


def test_example_locative_pp(tagger, parser):
    tagged, result = parse_line(tagger, parser, "Blutanhaftungen an der Gekroesewurzel.")
    assert result.is_full
    tree = result.trees[0]
    head = leaf(tree, "Blutanhaftungen")
    assert head.src == "UNG"
    assert head.features.get("num") == frozenset({"PL"})
    assert head.features.get("gen") == frozenset({"FEM"})
    pps = find_nodes(tree, lambda n: n.category == "PP")
    assert pps and all(pp.features.get("cas") == frozenset({"DAT"}) for pp in pps)
    inner = leaf(tree, "Gekroesewurzel")
    assert inner.src == "UC1"
    assert inner.features.get("cas") == frozenset({"DAT"})
    assert inner.features.get("num") == frozenset({"SG"})
    assert inner.features.get("gen") == frozenset({"FEM"})


def test_example_assumed_adjective(tagger, parser):
    tagged, result = parse_line(
        tagger, parser, "Kein ungehoeriger Inhalt in der Mundhoehle.",
        lexicon=CompositeLexicon(EXT_LEXICON),
    )
    assert result.is_full
    tree = result.trees[0]

    hyp = leaf(tree, "ungehoeriger")
    assert hyp.assumed == "ADJ"
    assert hyp.category == "ADJ"
    assert hyp.reading_cls == "XXX"

    kein = leaf(tree, "Kein")
    assert kein.features == parse_bundle("NOM", "SG", "MAS")
    inhalt = leaf(tree, "Inhalt")
    assert inhalt.features == parse_bundle("NOM", "SG", "MAS")

    mund = leaf(tree, "Mundhoehle")
    assert mund.src == "UC1"
    assert mund.features.get("gen") == frozenset({"FEM"})
    assert mund.features.get("num") == frozenset({"SG"})
    assert mund.features.get("cas") == frozenset({"DAT"})


def test_example_both_pps_accusative(tagger, parser):
    tagged, result = parse_line(
        tagger, parser, "Blutaustritt auf Flachschnitt in das Gewebe.",
        lexicon=CompositeLexicon(EXT_LEXICON),
    )
    assert result.is_full
    # attachment is ambiguous; every reading must make both PPs accusative
    for tree in result.trees:
        auf = [n for n in find_nodes(tree, lambda n: n.category == "PP")
               if next(iter(n.leaves())).surface == "auf"]
        ins = [n for n in find_nodes(tree, lambda n: n.category == "PP")
               if next(iter(n.leaves())).surface == "in"]
        assert auf and ins
        assert all(pp.features.get("cas") == frozenset({"AKK"}) for pp in auf + ins)
    assert len(result.trees) >= 2


def test_min_assumption_filter(tagger, parser):
    # "frei" is unknown: hypothesis readings each cost one assumption, so
    # reported trees carry exactly one and the N-hypothesis NPG tree stays
    tagged, result = parse_line(tagger, parser, "Harnleiter frei.")
    assert result.is_full
    assert {len(t.assumptions()) for t in result.trees} == {1}


def test_unfiltered_forest_superset(tagger, parser):
    tagged, result = parse_line(tagger, parser, "Harnleiter frei.")
    everything = parser.all_full_trees(tagged)
    assert len(everything) >= len(result.trees)
    assert all(t in everything for t in result.trees)


def test_derive_features_reads_off_narrowings(tagger, parser):
    tagged, result = parse_line(
        tagger, parser, "Kein ungehoeriger Inhalt in der Mundhoehle.",
        lexicon=CompositeLexicon(EXT_LEXICON),
    )
    tree = result.trees[0]
    derived = {(a.surface, a.comp): (a.values, a.src) for a in derive_features(tree)}
    assert derived[("Mundhoehle", "num")] == (frozenset({"SG"}), "UC1")
    assert derived[("Mundhoehle", "gen")] == (frozenset({"FEM"}), "UC1")
    assert derived[("Mundhoehle", "cas")] == (frozenset({"DAT"}), "UC1")
    # Inhalt came in with SG MAS already known: nothing to derive but case
    assert ("Inhalt", "num") not in derived
    assert ("Inhalt", "gen") not in derived


def test_partial_cover_when_no_full_parse(tagger, parser):
    tagged, result = parse_line(tagger, parser, "der an ohne.")
    assert result.kind == "PARTIAL"
    spans = [(t.start, t.end) for t in result.trees]
    assert spans[0][0] == 0
    assert spans[-1][1] == len(tagged)
    for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
        assert e1 == s2  # jointly exhaustive, non-overlapping


def test_empty_segment():
    from sublex.grammar import parse_grammar

    parser = ChartParser(parse_grammar("version 1\nNP1: NP -> N ; agree cas(LHS,0)\n"))
    result = parser.parse([])
    assert result.kind == "PARTIAL" and result.trees == []


# - brute-force oracle -

TERMINATORS = {".": "FS", "!": "FS", "?": "FS", ",": "COMMA"}
HYPS = ("N", "ADJ", "V")


@dataclass
class ONode:
    """Oracle tree with mutable feature sets for fixpoint solving."""

    cat: str
    feats: dict
    children: list = field(default_factory=list)
    rule: str | None = None
    token_index: int | None = None
    reading: POSReading | None = None
    assumed: str | None = None

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()


def oracle_leaves(index, tagged):
    out = []
    for reading in tagged.readings:
        feats = {c: set(reading.features.get(c)) for c in COMPONENTS}
        base = ONode(reading.cls.value, feats, token_index=index, reading=reading)
        out.append(base)
        if reading.cls is POSClass.PUNCT and tagged.token.surface in TERMINATORS:
            out.append(ONode(TERMINATORS[tagged.token.surface],
                             {c: set(reading.features.get(c)) for c in COMPONENTS},
                             token_index=index, reading=reading))
        if reading.cls is POSClass.XXX:
            for hyp in HYPS:
                out.append(ONode(hyp, {c: set(reading.features.get(c)) for c in COMPONENTS},
                                 token_index=index, reading=reading, assumed=hyp))
    return out


def clone(node):
    return ONode(
        node.cat, {c: set(v) for c, v in node.feats.items()},
        [clone(c) for c in node.children], node.rule,
        node.token_index, node.reading, node.assumed,
    )


def oracle_skeletons(tagged, grammar):
    """Every derivation skeleton over the whole token range, by naive
    recursive enumeration with memoization on spans."""
    n = len(tagged)
    memo = {}

    def span_trees(i, j):
        key = (i, j)
        if key in memo:
            return memo[key]
        found = []
        if j - i == 1:
            found.extend(oracle_leaves(i, tagged[i]))
        for rule in grammar.active_rules:
            width = len(rule.rhs)
            if width < 2 or width > j - i:
                continue
            for split in compositions(i, j, width):
                pools = []
                for slot, (a, b) in zip(rule.rhs, split):
                    pool = [t for t in span_trees(a, b) if t.cat in slot]
                    if not pool:
                        break
                    pools.append(pool)
                else:
                    for combo in product_all(pools):
                        found.append(ONode(rule.lhs,
                                           {c: set(component_domain(c)) for c in COMPONENTS},
                                           [clone(t) for t in combo], rule.name))
        # unary closure to fixpoint
        changed = True
        while changed:
            changed = False
            for rule in grammar.active_rules:
                if len(rule.rhs) != 1:
                    continue
                for t in list(found):
                    if t.cat in rule.rhs[0]:
                        candidate = ONode(rule.lhs,
                                          {c: set(component_domain(c)) for c in COMPONENTS},
                                          [clone(t)], rule.name)
                        if not any(same_skeleton(candidate, f) for f in found):
                            found.append(candidate)
                            changed = True
        memo[key] = found
        return found

    return [clone(t) for t in span_trees(0, n)]


def compositions(i, j, k):
    if k == 1:
        yield ((i, j),)
        return
    for mid in range(i + 1, j - k + 2):
        for rest in compositions(mid, j, k - 1):
            yield ((i, mid),) + rest


def product_all(pools):
    if not pools:
        yield ()
        return
    for head in pools[0]:
        for rest in product_all(pools[1:]):
            yield (head,) + rest


def same_skeleton(a, b):
    if (a.cat, a.rule, a.token_index, a.assumed) != (b.cat, b.rule, b.token_index, b.assumed):
        return False
    if a.token_index is not None:
        return a.reading is b.reading
    if len(a.children) != len(b.children):
        return False
    return all(same_skeleton(x, y) for x, y in zip(a.children, b.children))


def solve(tree, grammar):
    """Waltz-style fixpoint over every node's equations; None on failure."""
    nodes = list(tree.walk())
    changed = True
    while changed:
        changed = False
        for node in nodes:
            if node.rule is None:
                continue
            rule = grammar.by_name[node.rule]
            for eq in rule.equations:
                comp = eq.comp
                value = set(eq.const) if eq.const is not None else set(component_domain(comp))
                for m in eq.members:
                    value &= node.children[m].feats[comp]
                if eq.ties_lhs:
                    value &= node.feats[comp]
                if not value:
                    return None
                targets = [node.children[m] for m in eq.members]
                if eq.ties_lhs:
                    targets.append(node)
                for target in targets:
                    if target.feats[comp] != value:
                        target.feats[comp] = set(value)
                        changed = True
    return tree


def canon_oracle(node):
    feats = tuple(tuple(sorted(node.feats[c])) for c in COMPONENTS)
    if node.token_index is not None:
        orig = tuple(tuple(sorted(node.reading.features.get(c))) for c in COMPONENTS)
        src = node.reading.src.value if node.reading.src in (
            Source.UNG, Source.UC1, Source.ADJE, Source.NUM) else None
        return ("leaf", node.cat, node.token_index, node.reading.cls.value,
                src, node.assumed, orig, feats)
    return (node.cat, node.rule, feats, tuple(canon_oracle(c) for c in node.children))


def canon_chart(node: ParseNode):
    feats = tuple(tuple(sorted(node.features.get(c))) for c in COMPONENTS)
    if node.is_leaf:
        orig = tuple(tuple(sorted(node.original.get(c))) for c in COMPONENTS)
        return ("leaf", node.category, node.token_index, node.reading_cls,
                node.src, node.assumed, orig, feats)
    return (node.category, node.rule, feats, tuple(canon_chart(c) for c in node.children))


READING_POOL = [
    ("N", "NOM|AKK SG MAS"), ("N", "_ _ _"), ("N", "_ PL FEM"),
    ("N", "GEN SG MAS|NTR"), ("ADJ", "_ _ _"), ("V", "_ SG _"),
    ("V", "_ PL _"), ("DETD", "NOM SG MAS"), ("DETD", "GEN|DAT SG FEM"),
    ("DETI", "NOM|AKK SG NTR"), ("PRP", "DAT|AKK _ _"), ("PRP", "DAT _ _"),
    ("CONJ", "_ _ _"), ("ADV", "_ _ _"), ("NEG", "_ _ _"),
    ("NUMBERTOK", "_ _ _"),
]


def random_tagged(rng, n):
    tagged = []
    for i in range(n):
        kind = rng.random()
        if kind < 0.15:
            readings = (POSReading(POSClass.XXX, FeatureBundle(), Source.NONE),)
            surface, shape = "unk%d" % i, Shape.WORD_LOWER
        elif kind < 0.25:
            surface = rng.choice([".", ","])
            shape = Shape.PUNCT
            readings = (POSReading(POSClass.PUNCT, FeatureBundle(), Source.CLOSED),)
        else:
            count = rng.randint(1, 2)
            readings = tuple(
                POSReading(POSClass(cls), parse_bundle(*spec.split()),
                           rng.choice([Source.LEXICON, Source.CLOSED, Source.UC1]))
                for cls, spec in rng.sample(READING_POOL, count)
            )
            surface, shape = "w%d" % i, Shape.WORD_LOWER
        token = Token(surface, i * 4, i * 4 + 3, shape)
        tagged.append(TaggedToken(token, readings))
    return tagged


def test_full_forest_matches_brute_force(grammar, parser):
    rng = random.Random(20260817)
    segments = 0
    nonempty = 0
    while segments < 520:
        n = rng.randint(1, 6)
        tagged = random_tagged(rng, n)
        chart_set = {canon_chart(t) for t in parser.all_full_trees(tagged)}
        oracle_set = set()
        for skeleton in oracle_skeletons(tagged, grammar):
            solved = solve(skeleton, grammar)
            if solved is not None:
                oracle_set.add(canon_oracle(solved))
        assert chart_set == oracle_set, "mismatch on %s" % (
            [(t.token.surface, [r.cls.value for r in t.readings]) for t in tagged],
        )
        segments += 1
        if chart_set:
            nonempty += 1
    assert segments >= 500
    assert nonempty >= 50  # the generator must actually exercise parses

"""Bottom-up chart parser with unification and unknown-class hypotheses.

Every tagged reading of a token becomes a leaf edge. A token whose only
reading is XXX additionally spawns hypothesis leaves for N, ADJ and V, each
carrying an assumption mark; a full parse that uses such a leaf is a parse
"under assumption" and later turns into a lexicon suggestion.

Rule application solves the rule's agreement equations by set intersection
and narrows the participating children functionally (a fresh, narrowed copy
of the subtree; narrowing cascades through each child's own LHS-tied
equations). A solved parent therefore always displays features consistent
with every leaf below it, which is what feature derivation reads off.

Full stops and commas matter structurally: a PUNCT leaf whose surface is "."
also enters the chart as FS, a "," also as COMMA, so rules can anchor on the
record terminator without lexicalized slots.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import product

from .features import COMPONENTS, FULL_BUNDLE, FeatureBundle, component_domain
from .grammar import Grammar, GrammarRule
from .tagging import POSClass, POSReading, Source, TaggedToken

TERMINATOR_CATEGORY = {".": "FS", "!": "FS", "?": "FS", ",": "COMMA"}
HYPOTHESIS_CLASSES = ("N", "ADJ", "V")


@dataclass(frozen=True)
class ParseNode:
    category: str
    features: FeatureBundle
    start: int
    end: int
    rule: str | None = None
    children: tuple = ()
    # leaf-only fields
    token_index: int | None = None
    surface: str | None = None
    reading_cls: str | None = None  # tagged class; differs from category for hypotheses
    src: str | None = None  # heuristic source marker (UNG/UC1/...), None for known words
    assumed: str | None = None  # hypothesized class for an XXX token
    original: FeatureBundle | None = None  # reading features before narrowing

    @property
    def is_leaf(self) -> bool:
        return self.token_index is not None

    def leaves(self):
        if self.is_leaf:
            yield self
        else:
            for child in self.children:
                yield from child.leaves()

    def assumptions(self) -> tuple:
        return tuple((l.token_index, l.assumed) for l in self.leaves() if l.assumed)

    def iter_nodes(self):
        yield self
        for child in self.children:
            yield from child.iter_nodes()


@dataclass
class ParseResult:
    kind: str  # "FULL" | "PARTIAL"
    trees: list[ParseNode]

    @property
    def is_full(self) -> bool:
        return self.kind == "FULL"


def leaf_edges(index: int, tagged: TaggedToken) -> list[ParseNode]:
    """All chart entries a tagged token contributes (readings, hypothesis
    leaves for unknowns, terminator aliases)."""
    edges = []
    for reading in tagged.readings:
        src = reading.src.value if reading.src in (
            Source.UNG, Source.UC1, Source.ADJE, Source.NUM
        ) else None
        base = ParseNode(
            category=reading.cls.value,
            features=reading.features,
            start=index,
            end=index + 1,
            token_index=index,
            surface=tagged.token.surface,
            reading_cls=reading.cls.value,
            src=src,
            original=reading.features,
        )
        edges.append(base)
        if reading.cls is POSClass.PUNCT and tagged.token.surface in TERMINATOR_CATEGORY:
            edges.append(replace(base, category=TERMINATOR_CATEGORY[tagged.token.surface]))
        if reading.cls is POSClass.XXX:
            for hyp in HYPOTHESIS_CLASSES:
                edges.append(replace(base, category=hyp, assumed=hyp))
    return edges


def narrow(node: ParseNode, updates: dict, grammar: Grammar) -> ParseNode:
    """Return a copy of the subtree with components narrowed to the solved
    values; pushes through equations that tie the LHS."""
    effective = {c: v for c, v in updates.items() if v != node.features.get(c)}
    if not effective:
        return node
    feats = node.features
    for comp, values in effective.items():
        feats = feats.replace(comp, values)
    if node.is_leaf:
        return replace(node, features=feats)
    rule = grammar.by_name[node.rule]
    child_updates: dict[int, dict] = {}
    for comp, values in effective.items():
        group = rule.lhs_group(comp)
        if group is None:
            continue
        for member in group.members:
            child_updates.setdefault(member, {})[comp] = values
    children = tuple(
        narrow(child, child_updates[i], grammar) if i in child_updates else child
        for i, child in enumerate(node.children)
    )
    return replace(node, features=feats, children=children)


def apply_rule(rule: GrammarRule, parts: tuple, grammar: Grammar) -> ParseNode | None:
    """Solve the rule's equations over candidate children; None on failure."""
    solved_parent = {}
    child_updates: dict[int, dict] = {}
    for eq in rule.equations:
        value = eq.const if eq.const is not None else component_domain(eq.comp)
        for member in eq.members:
            value = value & parts[member].features.get(eq.comp)
            if not value:
                return None
        if eq.ties_lhs:
            solved_parent[eq.comp] = value
        for member in eq.members:
            child_updates.setdefault(member, {})[eq.comp] = value
    children = tuple(
        narrow(part, child_updates[i], grammar) if i in child_updates else part
        for i, part in enumerate(parts)
    )
    features = FULL_BUNDLE
    for comp, values in solved_parent.items():
        features = features.replace(comp, values)
    return ParseNode(
        category=rule.lhs,
        features=features,
        start=parts[0].start,
        end=parts[-1].end,
        rule=rule.name,
        children=children,
    )


def _compositions(start: int, end: int, slots: int):
    """All splits of [start, end) into `slots` non-empty adjacent spans."""
    if slots == 1:
        yield ((start, end),)
        return
    for mid in range(start + 1, end - slots + 2):
        for rest in _compositions(mid, end, slots - 1):
            yield ((start, mid),) + rest


class ChartParser:
    def __init__(self, grammar: Grammar):
        self.grammar = grammar

    def _chart(self, tagged: list[TaggedToken]) -> dict:
        n = len(tagged)
        cells: dict[tuple, list] = {}
        for i, tok in enumerate(tagged):
            cells[(i, i + 1)] = leaf_edges(i, tok)
        rules = self.grammar.active_rules
        for width in range(1, n + 1):
            for start in range(0, n - width + 1):
                span = (start, start + width)
                cell = cells.setdefault(span, [])
                seen = set(cell)
                # non-unary rules build from smaller spans; unary rules close
                # over the cell until nothing new appears
                if width >= 1:
                    for rule in rules:
                        if len(rule.rhs) < 2 or len(rule.rhs) > width:
                            continue
                        for split in _compositions(start, start + width, len(rule.rhs)):
                            pools = []
                            ok = True
                            for slot, sub in zip(rule.rhs, split):
                                pool = [nd for nd in cells.get(sub, ()) if nd.category in slot]
                                if not pool:
                                    ok = False
                                    break
                                pools.append(pool)
                            if not ok:
                                continue
                            for parts in product(*pools):
                                node = apply_rule(rule, parts, self.grammar)
                                if node is not None and node not in seen:
                                    seen.add(node)
                                    cell.append(node)
                changed = True
                while changed:
                    changed = False
                    for rule in rules:
                        if len(rule.rhs) != 1:
                            continue
                        for nd in list(cell):
                            if nd.category in rule.rhs[0]:
                                node = apply_rule(rule, (nd,), self.grammar)
                                if node is not None and node not in seen:
                                    seen.add(node)
                                    cell.append(node)
                                    changed = True
        return cells

    def all_full_trees(self, tagged: list[TaggedToken]) -> list[ParseNode]:
        """Every derivation covering the whole segment, unfiltered."""
        if not tagged:
            return []
        return list(self._chart(tagged)[(0, len(tagged))])

    def parse(self, tagged: list[TaggedToken]) -> ParseResult:
        """FULL (minimum-assumption covering trees) or PARTIAL (greedy cover)."""
        if not tagged:
            return ParseResult("PARTIAL", [])
        cells = self._chart(tagged)
        full = cells[(0, len(tagged))]
        if full:
            best = min(len(t.assumptions()) for t in full)
            return ParseResult("FULL", [t for t in full if len(t.assumptions()) == best])
        return ParseResult("PARTIAL", combine_partials(cells, len(tagged), self.grammar))


def _edge_sort_key(node: ParseNode, grammar: Grammar):
    if node.rule is not None:
        rule_index = grammar.by_name[node.rule].index
        leaf_tier = 0
    else:
        rule_index = len(grammar.rules)
        # plain readings before hypothesis leaves, XXX itself last
        if node.assumed:
            leaf_tier = 1
        elif node.category == "XXX":
            leaf_tier = 2
        else:
            leaf_tier = 0
    return (
        -(node.end - node.start),
        len(node.assumptions()),
        rule_index,
        leaf_tier,
        node.category,
        str(node.features),
    )


def combine_partials(cells: dict, n: int, grammar: Grammar) -> list[ParseNode]:
    """Greedy left-to-right cover: at each position take the longest edge,
    ties broken by fewer assumptions, then lower rule index. Jointly
    exhaustive and non-overlapping by construction."""
    out = []
    pos = 0
    while pos < n:
        candidates = []
        for (start, end), nodes in cells.items():
            if start == pos and nodes:
                candidates.extend(nodes)
        best = min(candidates, key=lambda nd: _edge_sort_key(nd, grammar))
        out.append(best)
        pos = best.end
    return out


@dataclass(frozen=True)
class FeatureAssignment:
    """A narrowing the parse forced on an underspecified leaf component."""

    token_index: int
    surface: str
    comp: str
    values: frozenset
    src: str | None


def derive_features(tree: ParseNode) -> list[FeatureAssignment]:
    """Read narrowings off a solved tree: every leaf component that the
    reading left fully open but the tree pinned down. Non-singleton results
    are kept as sets, never guessed."""
    out = []
    for leaf in tree.leaves():
        if leaf.original is None:
            continue
        for comp in COMPONENTS:
            before = leaf.original.get(comp)
            after = leaf.features.get(comp)
            if before == component_domain(comp) and after != before:
                out.append(
                    FeatureAssignment(
                        token_index=leaf.token_index,
                        surface=leaf.surface,
                        comp=comp,
                        values=after,
                        src=leaf.src,
                    )
                )
    return out

"""Entity/value co-occurrence analysis.

The matrix is a bipartite counts graph between entities and values. The
zig-zag closure grows an entity set and a value set alternately - all values
of the current entities, then all entities of the current values - until
neither side changes. That fixed point is exactly the connected component of
the seed in the bipartite graph, which is what the independent traversal in
the test suite checks it against. Counts stay counts; no weighting or
statistics, the corpus sizes here do not support any.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .relations import RelationTable


class UnknownSeed(KeyError):
    """Seed entity/value does not occur in the matrix."""


class UnknownEntity(KeyError):
    """Entity does not occur in the matrix."""


@dataclass
class CoocMatrix:
    entity_values: dict[str, dict[str, int]] = field(default_factory=dict)
    value_entities: dict[str, dict[str, int]] = field(default_factory=dict)

    @classmethod
    def from_table(cls, table: RelationTable) -> "CoocMatrix":
        matrix = cls()
        for entity, value, count in table.pairs():
            matrix.add(entity, value, count)
        return matrix

    def add(self, entity: str, value: str, count: int = 1):
        self.entity_values.setdefault(entity, {})
        self.value_entities.setdefault(value, {})
        self.entity_values[entity][value] = self.entity_values[entity].get(value, 0) + count
        self.value_entities[value][entity] = self.value_entities[value].get(entity, 0) + count

    def total(self) -> int:
        return sum(c for row in self.entity_values.values() for c in row.values())


@dataclass
class Cluster:
    seed: str
    seed_kind: str  # "entity" | "value"
    entities: tuple[str, ...]
    values: tuple[str, ...]
    rounds: int


def zigzag_closure(matrix: CoocMatrix, seed: str, seed_kind: str = "value") -> Cluster:
    """Alternating expansion to the fixed point; deterministic order.

    Each round adds every counterpart of the current frontier; only growing
    alternations count as rounds, so an isolated pair finishes with rounds=1.
    The result never depends on which member of the component seeded it
    (membership-wise).
    """
    if seed_kind == "value":
        if seed not in matrix.value_entities:
            raise UnknownSeed(seed)
        values: dict[str, None] = {seed: None}
        entities: dict[str, None] = {}
    elif seed_kind == "entity":
        if seed not in matrix.entity_values:
            raise UnknownSeed(seed)
        entities = {seed: None}
        values = {}
    else:
        raise ValueError("seed_kind must be 'entity' or 'value'")

    rounds = 0
    while True:
        grew = False
        for value in list(values):
            for entity in matrix.value_entities[value]:
                if entity not in entities:
                    entities[entity] = None
                    grew = True
        for entity in list(entities):
            for value in matrix.entity_values[entity]:
                if value not in values:
                    values[value] = None
                    grew = True
        if not grew:
            break
        rounds += 1
    return Cluster(
        seed=seed,
        seed_kind=seed_kind,
        entities=tuple(entities),
        values=tuple(values),
        rounds=rounds,
    )


def group_by_value(matrix: CoocMatrix, value: str, min_count: int = 1) -> list[str]:
    """Entities a value was asserted of at least min_count times,
    first-occurrence order."""
    if value not in matrix.value_entities:
        raise UnknownSeed(value)
    return [e for e, c in matrix.value_entities[value].items() if c >= min_count]


def property_inventory(matrix: CoocMatrix, entity: str, min_count: int = 1) -> list[tuple[str, int]]:
    """(value, count) rows for one entity, count-descending then alphabetic."""
    if entity not in matrix.entity_values:
        raise UnknownEntity(entity)
    rows = [(v, c) for v, c in matrix.entity_values[entity].items() if c >= min_count]
    rows.sort(key=lambda vc: (-vc[1], vc[0]))
    return rows

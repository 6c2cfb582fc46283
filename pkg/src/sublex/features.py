"""Set-valued agreement features and their unification algebra.

A feature bundle holds one set per agreement dimension: case, number and
gender. A full set means "unconstrained"; unification is the component-wise
intersection and fails as soon as any component would become empty. Empty
component sets are therefore unrepresentable by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

CASES = ("NOM", "GEN", "DAT", "AKK")
NUMBERS = ("SG", "PL")
GENDERS = ("MAS", "FEM", "NTR")

COMPONENTS = ("cas", "num", "gen")

_DOMAIN = {
    "cas": frozenset(CASES),
    "num": frozenset(NUMBERS),
    "gen": frozenset(GENDERS),
}
_ORDER = {
    "cas": CASES,
    "num": NUMBERS,
    "gen": GENDERS,
}

FULL_CAS = _DOMAIN["cas"]
FULL_NUM = _DOMAIN["num"]
FULL_GEN = _DOMAIN["gen"]


class UnificationError(ValueError):
    """Raised when a bundle would be built with an empty component."""


@dataclass(frozen=True)
class FeatureBundle:
    """One non-empty value set per agreement component."""

    cas: frozenset = FULL_CAS
    num: frozenset = FULL_NUM
    gen: frozenset = FULL_GEN

    def __post_init__(self):
        for comp in COMPONENTS:
            values = getattr(self, comp)
            if not isinstance(values, frozenset):
                object.__setattr__(self, comp, frozenset(values))
                values = getattr(self, comp)
            if not values:
                raise UnificationError("empty %s set" % comp)
            bad = values - _DOMAIN[comp]
            if bad:
                raise UnificationError("unknown %s value(s): %s" % (comp, sorted(bad)))

    def get(self, comp: str) -> frozenset:
        return getattr(self, comp)

    def replace(self, comp: str, values) -> "FeatureBundle":
        parts = {c: self.get(c) for c in COMPONENTS}
        parts[comp] = frozenset(values)
        return FeatureBundle(**parts)

    def is_full(self, comp: str | None = None) -> bool:
        if comp is not None:
            return self.get(comp) == _DOMAIN[comp]
        return all(self.get(c) == _DOMAIN[c] for c in COMPONENTS)

    def format_component(self, comp: str) -> str:
        values = self.get(comp)
        if values == _DOMAIN[comp]:
            return "_"
        return "|".join(v for v in _ORDER[comp] if v in values)

    def __str__(self):
        return " ".join("%s=%s" % (c, self.format_component(c)) for c in COMPONENTS)


FULL_BUNDLE = FeatureBundle()


def unify(a: FeatureBundle, b: FeatureBundle) -> FeatureBundle | None:
    """Component-wise intersection; None signals failure (some empty cut)."""
    parts = {}
    for comp in COMPONENTS:
        cut = a.get(comp) & b.get(comp)
        if not cut:
            return None
        parts[comp] = cut
    return FeatureBundle(**parts)


def component_domain(comp: str) -> frozenset:
    return _DOMAIN[comp]


def parse_component(comp: str, text: str) -> frozenset:
    """Parse the textual form used by resources and XML ("_" means full)."""
    text = text.strip()
    if text in ("_", ""):
        return _DOMAIN[comp]
    values = frozenset(p.strip() for p in text.split("|") if p.strip())
    if not values or values - _DOMAIN[comp]:
        raise UnificationError("bad %s spec: %r" % (comp, text))
    return values


def parse_bundle(cas: str = "_", num: str = "_", gen: str = "_") -> FeatureBundle:
    return FeatureBundle(
        cas=parse_component("cas", cas),
        num=parse_component("num", num),
        gen=parse_component("gen", gen),
    )

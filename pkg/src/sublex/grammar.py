"""Feature-augmented phrase grammar and its line-oriented rule format.

One rule per line:

    NAME: LHS -> SLOT SLOT ... ; head=i ; agree cas(LHS,0,1) ; fix num(LHS)=PL ; type=FULL

  * SLOT is a category name, or several joined by "|" (the slot accepts any
    of them, e.g. "DETD|DETI").
  * "agree comp(REF,REF,...)" ties the component of the listed constituents
    together; REF is the literal word LHS or a zero-based slot index. The
    solved value is their intersection.
  * "fix comp(REF)=VAL[|VAL]" intersects a constant into a constituent (or
    into the solved parent value when REF is LHS).
  * "head=i" names the head slot; "type=..." tags NP rules (FULL/COMPLEX)
    for serialization.

Rule groups are opened by a line "group <name>" and can be switched off as a
set. A "version <n>" header line is required first.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .features import COMPONENTS, component_domain, parse_component

LHS_REF = -1  # internal marker for the LHS in equation groups


class GrammarError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class EquationGroup:
    """One solved value per (component, group): intersection of the member
    constituents' sets, the constant, and (if tied in) the parent's set."""

    comp: str
    members: tuple[int, ...]  # rhs slot indices
    ties_lhs: bool = False
    const: frozenset | None = None


@dataclass(frozen=True)
class GrammarRule:
    name: str
    lhs: str
    rhs: tuple[frozenset, ...]  # one category set per slot
    index: int
    head: int = 0
    group: str = "core"
    node_type: str | None = None
    equations: tuple[EquationGroup, ...] = ()

    def groups_for(self, comp: str):
        return [g for g in self.equations if g.comp == comp]

    def lhs_group(self, comp: str) -> EquationGroup | None:
        for g in self.equations:
            if g.comp == comp and g.ties_lhs:
                return g
        return None


@dataclass
class Grammar:
    version: int
    rules: list[GrammarRule]
    disabled_groups: frozenset = frozenset()

    def __post_init__(self):
        self.by_name = {r.name: r for r in self.rules}
        self._refresh()

    def _refresh(self):
        self.active_rules = [r for r in self.rules if r.group not in self.disabled_groups]

    @property
    def group_names(self) -> tuple[str, ...]:
        seen = []
        for r in self.rules:
            if r.group not in seen:
                seen.append(r.group)
        return tuple(seen)

    def without_groups(self, *names: str) -> "Grammar":
        unknown = set(names) - set(self.group_names)
        if unknown:
            raise GrammarError("unknown group(s): %s" % sorted(unknown))
        return Grammar(self.version, self.rules, self.disabled_groups | frozenset(names))

    def categories(self) -> set:
        cats = set()
        for r in self.active_rules:
            cats.add(r.lhs)
            for slot in r.rhs:
                cats.update(slot)
        return cats


_RULE_RE = re.compile(r"^(?P<name>[A-Za-z0-9_]+)\s*:\s*(?P<lhs>[A-Z][A-Za-z0-9]*)\s*->\s*(?P<rhs>[^;]+)(?P<clauses>(;.*)?)$")
_AGREE_RE = re.compile(r"^agree\s+(?P<comp>cas|num|gen)\s*\(\s*(?P<refs>[^)]*)\)$")
_FIX_RE = re.compile(r"^fix\s+(?P<comp>cas|num|gen)\s*\(\s*(?P<ref>[^)]*)\)\s*=\s*(?P<values>\S+)$")


def _parse_ref(text: str, n_slots: int, lineno: int) -> int:
    text = text.strip()
    if text == "LHS":
        return LHS_REF
    if not text.isdigit():
        raise GrammarError("bad constituent reference %r" % text, lineno)
    idx = int(text)
    if idx >= n_slots:
        raise GrammarError("constituent index %d out of range" % idx, lineno)
    return idx


def parse_grammar(text: str) -> Grammar:
    version = None
    rules: list[GrammarRule] = []
    group = "core"
    names = set()
    for lineno, rawline in enumerate(text.splitlines(), 1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("version"):
            parts = line.split()
            if len(parts) != 2 or not parts[1].isdigit():
                raise GrammarError("bad version line", lineno)
            version = int(parts[1])
            continue
        if line.startswith("group "):
            group = line.split(None, 1)[1].strip()
            if not group:
                raise GrammarError("empty group name", lineno)
            continue
        if version is None:
            raise GrammarError("missing 'version <n>' header before first rule", lineno)
        m = _RULE_RE.match(line)
        if not m:
            raise GrammarError("unparseable rule", lineno)
        name = m.group("name")
        if name in names:
            raise GrammarError("duplicate rule name %r" % name, lineno)
        names.add(name)
        rhs = tuple(
            frozenset(alt.strip() for alt in slot.split("|") if alt.strip())
            for slot in m.group("rhs").split()
        )
        if not rhs or any(not slot for slot in rhs):
            raise GrammarError("empty right-hand side slot", lineno)
        head = 0
        node_type = None
        equations: list[EquationGroup] = []
        lhs_tied = set()
        for clause in m.group("clauses").split(";"):
            clause = clause.strip()
            if not clause:
                continue
            if clause.startswith("head="):
                value = clause[5:].strip()
                if not value.isdigit() or int(value) >= len(rhs):
                    raise GrammarError("bad head index %r" % value, lineno)
                head = int(value)
            elif clause.startswith("type="):
                node_type = clause[5:].strip()
            else:
                am = _AGREE_RE.match(clause)
                fm = _FIX_RE.match(clause)
                if am:
                    comp = am.group("comp")
                    refs = [_parse_ref(r, len(rhs), lineno) for r in am.group("refs").split(",") if r.strip()]
                    if len(refs) < 2:
                        raise GrammarError("agree needs at least two references", lineno)
                    ties_lhs = LHS_REF in refs
                    members = tuple(sorted(r for r in refs if r != LHS_REF))
                    if ties_lhs and comp in lhs_tied:
                        raise GrammarError("multiple LHS equations for %s" % comp, lineno)
                    if ties_lhs:
                        lhs_tied.add(comp)
                    equations.append(EquationGroup(comp, members, ties_lhs))
                elif fm:
                    comp = fm.group("comp")
                    ref = _parse_ref(fm.group("ref"), len(rhs), lineno)
                    try:
                        const = parse_component(comp, fm.group("values"))
                    except ValueError as exc:
                        raise GrammarError(str(exc), lineno) from exc
                    ties_lhs = ref == LHS_REF
                    if ties_lhs and comp in lhs_tied:
                        raise GrammarError("multiple LHS equations for %s" % comp, lineno)
                    if ties_lhs:
                        lhs_tied.add(comp)
                    members = () if ties_lhs else (ref,)
                    equations.append(EquationGroup(comp, members, ties_lhs, const))
                else:
                    raise GrammarError("unknown clause %r" % clause, lineno)
        rules.append(
            GrammarRule(
                name=name,
                lhs=m.group("lhs"),
                rhs=rhs,
                index=len(rules),
                head=head,
                group=group,
                node_type=node_type,
                equations=_merge_groups(equations, lineno),
            )
        )
    if version is None:
        raise GrammarError("empty grammar: no version header")
    if not rules:
        raise GrammarError("grammar defines no rules")
    return Grammar(version=version, rules=rules)


def _merge_groups(equations: list[EquationGroup], lineno: int) -> tuple[EquationGroup, ...]:
    """Merge agree/fix clauses that share a component and overlap in
    membership (or both tie the LHS) into single solved groups."""
    merged: list[EquationGroup] = []
    for eq in equations:
        target = None
        for i, have in enumerate(merged):
            if have.comp != eq.comp:
                continue
            if (have.ties_lhs and eq.ties_lhs) or (set(have.members) & set(eq.members)):
                target = i
                break
        if target is None:
            merged.append(eq)
        else:
            have = merged[target]
            const = have.const
            if eq.const is not None:
                cut = (const & eq.const) if const is not None else eq.const
                if not cut:
                    raise GrammarError("contradictory constants for %s" % eq.comp, lineno)
                const = cut
            merged[target] = EquationGroup(
                eq.comp,
                tuple(sorted(set(have.members) | set(eq.members))),
                have.ties_lhs or eq.ties_lhs,
                const,
            )
    return tuple(merged)


def load_grammar(path: str | Path) -> Grammar:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError("grammar file not found: %s" % path)
    return parse_grammar(path.read_text(encoding="utf-8"))

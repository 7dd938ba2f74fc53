"""First-order syntax: terms, atoms, weighted Horn clauses and decision lists.

Every object here is an immutable value. Clause bodies are positive
conjunctions; head arguments are distinct variables that are shared by all
rules of a list and are never renamed.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

VARIABLE = "var"
CONSTANT = "const"

# Upper bound on atom orderings tried while canonicalising one group.
_MAX_KEY_PERMUTATIONS = 5040


@dataclass(frozen=True, slots=True)
class Term:
    kind: str
    name: str

    def __post_init__(self):
        if self.kind not in (VARIABLE, CONSTANT):
            raise ValueError(f"unknown term kind {self.kind!r}")
        if not self.name:
            raise ValueError("term name must be non-empty")

    @property
    def is_var(self) -> bool:
        return self.kind == VARIABLE

    def __str__(self) -> str:
        return self.name


def var(name: str) -> Term:
    return Term(VARIABLE, name)


def const(name: str) -> Term:
    return Term(CONSTANT, name)


@dataclass(frozen=True, slots=True)
class Atom:
    predicate: str
    args: tuple[Term, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def signature(self) -> tuple[str, int]:
        return (self.predicate, len(self.args))

    def variables(self) -> set[Term]:
        return {t for t in self.args if t.is_var}

    def is_ground(self) -> bool:
        return not any(t.is_var for t in self.args)

    def __str__(self) -> str:
        return f"{self.predicate}({','.join(t.name for t in self.args)})"


@dataclass(frozen=True, slots=True)
class Clause:
    """A weighted rule ``value: head :- body``.

    ``provenance`` lists the ``(tree_index, leaf_index)`` pairs the rule was
    built from, one per input tree once merging is complete.
    """

    head: Atom
    body: tuple[Atom, ...] = ()
    value: float = 0.0
    provenance: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        seen = set()
        for t in self.head.args:
            if not t.is_var:
                raise ValueError(f"head argument {t} of {self.head} is not a variable")
            if t in seen:
                raise ValueError(f"head variable {t} repeated in {self.head}")
            seen.add(t)

    @property
    def head_vars(self) -> frozenset[Term]:
        return frozenset(self.head.args)

    def body_vars(self) -> set[Term]:
        out: set[Term] = set()
        for a in self.body:
            out |= a.variables()
        return out

    def local_vars(self) -> set[Term]:
        return self.body_vars() - self.head_vars

    def with_body(self, body: Iterable[Atom]) -> Clause:
        return Clause(self.head, tuple(body), self.value, self.provenance)

    def __str__(self) -> str:
        return format_rule(self)


def format_rule(c: Clause, value: float | None = None) -> str:
    v = c.value if value is None else value
    body = ", ".join(str(a) for a in c.body)
    return f"{format_value(v)}: {c.head} :- {body}." if body else f"{format_value(v)}: {c.head} :- ."


def format_value(v: float) -> str:
    # shortest repr that round-trips the double exactly
    return repr(float(v))


@dataclass(frozen=True, slots=True)
class PredicateGroup:
    """A connected component of a clause body.

    Two body atoms are connected when they share a variable that does not
    occur in the head.
    """

    atoms: tuple[Atom, ...]
    head_vars: frozenset[Term]
    owner: tuple[tuple[int, int], ...] = ()
    key: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.atoms:
            raise ValueError("a predicate group needs at least one atom")
        if not self.key:
            object.__setattr__(self, "key", canonical_key(self.atoms, self.head_vars))


@dataclass(frozen=True, slots=True)
class DecisionList:
    """Ordered rules over one target; the first rule whose body holds fires.

    With ``combine == "average"`` rule values hold sums over ``tree_count``
    trees and are divided once at prediction time.
    """

    target: Atom
    rules: tuple[Clause, ...]
    combine: str = "sum"
    tree_count: int = 1

    def __post_init__(self):
        if self.combine not in ("sum", "average"):
            raise ValueError(f"unknown combine mode {self.combine!r}")
        if self.tree_count < 1:
            raise ValueError("tree_count must be >= 1")
        if not self.rules:
            raise ValueError("a decision list needs at least one rule")
        for r in self.rules:
            if r.head != self.target:
                raise ValueError(f"rule head {r.head} differs from target {self.target}")
        if self.rules[-1].body:
            raise ValueError("the last rule of a decision list must have an empty body")

    def __len__(self) -> int:
        return len(self.rules)

    def effective_value(self, rule: Clause) -> float:
        if self.combine == "average":
            return rule.value / self.tree_count
        return rule.value

    @property
    def avg_body_length(self) -> float:
        return sum(len(r.body) for r in self.rules) / len(self.rules)


def apply_substitution(atoms: Sequence[Atom], theta: Mapping[Term, Term]) -> list[Atom]:
    if not theta:
        return list(atoms)
    return [Atom(a.predicate, tuple(theta.get(t, t) for t in a.args)) for a in atoms]


def tagged_name(name: str, tag: str) -> str:
    return f"{name}_{tag}"


def standardize_apart(c: Clause, tag: str) -> Clause:
    """Rename every body-local variable of ``c`` to ``<name>_<tag>``."""
    head = c.head_vars
    head_names = {t.name for t in head}
    theta = {}
    for v in c.local_vars():
        new = tagged_name(v.name, tag)
        if new in head_names:
            raise ValueError(f"renaming {v} with tag {tag!r} collides with a head variable")
        theta[v] = var(new)
    return c.with_body(apply_substitution(c.body, theta))


def group_indices(c: Clause) -> list[list[int]]:
    """Body positions of each connected component, in first-occurrence order."""
    body = c.body
    head = c.head_vars
    parent = list(range(len(body)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    first_seen: dict[Term, int] = {}
    for i, a in enumerate(body):
        for t in a.args:
            if not t.is_var or t in head:
                continue
            j = first_seen.setdefault(t, i)
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)

    # roots are the smallest index of each component, so dict order is first-occurrence order
    members: dict[int, list[int]] = {}
    for i in range(len(body)):
        members.setdefault(find(i), []).append(i)
    return list(members.values())


def literal_groups(c: Clause, owner=None) -> list[PredicateGroup]:
    """Split the body of ``c`` into predicate groups, in first-occurrence order."""
    owner = c.provenance if owner is None else owner
    head = c.head_vars
    return [PredicateGroup(tuple(c.body[i] for i in idx), head, owner) for idx in group_indices(c)]


def _pattern(a: Atom, head: frozenset[Term]) -> tuple:
    return (
        a.predicate,
        a.arity,
        tuple(
            ("c", t.name) if not t.is_var else ("h", t.name) if t in head else ("v", "")
            for t in a.args
        ),
    )


def _render(atoms: Iterable[Atom], head: frozenset[Term]) -> str:
    numbering: dict[Term, str] = {}
    parts = []
    for a in atoms:
        args = []
        for t in a.args:
            if not t.is_var:
                args.append(t.name)
            elif t in head:
                args.append(t.name)
            else:
                args.append(numbering.setdefault(t, f"?{len(numbering)}"))
        parts.append(f"{a.predicate}({','.join(args)})")
    return "&".join(parts)


def canonical_key(atoms: Sequence[Atom], head_vars: Iterable[Term]) -> str:
    """Return a string that is identical for variants of ``atoms``.

    Atoms are sorted by (predicate, arity, argument pattern). Atoms with equal
    patterns are tried in every order and the smallest rendering wins, so the
    key does not depend on input order. Past ``_MAX_KEY_PERMUTATIONS`` only
    the input order inside tie blocks is used; the key is still a faithful
    rendering, so equal keys always mean variants.
    """
    head = frozenset(head_vars)
    decorated = sorted(((_pattern(a, head), i, a) for i, a in enumerate(atoms)), key=lambda x: (x[0], x[1]))
    blocks: list[list[Atom]] = []
    prev = None
    for pat, _, a in decorated:
        if pat != prev:
            blocks.append([])
            prev = pat
        blocks[-1].append(a)

    total = 1
    for b in blocks:
        for k in range(2, len(b) + 1):
            total *= k
            if total > _MAX_KEY_PERMUTATIONS:
                break
    if total > _MAX_KEY_PERMUTATIONS:
        return _render((a for b in blocks for a in b), head)

    best = None
    for choice in itertools.product(*(itertools.permutations(b) for b in blocks)):
        s = _render((a for b in choice for a in b), head)
        if best is None or s < best:
            best = s
    return best


_TAG_SUFFIX = re.compile(r"^(.+)_t\d+$")


def untag(c: Clause) -> Clause:
    """Strip standardize-apart suffixes from body variables when that stays unambiguous.

    The renaming is applied only if it is injective and does not capture a
    head variable; otherwise the clause is returned unchanged.
    """
    local = c.local_vars()
    if not local:
        return c
    theta = {}
    for v in local:
        m = _TAG_SUFFIX.match(v.name)
        theta[v] = var(m.group(1)) if m else v
    targets = set(theta.values())
    if len(targets) != len(theta) or targets & c.head_vars:
        return c
    return c.with_body(apply_substitution(c.body, theta))


def untag_list(dl: DecisionList) -> DecisionList:
    return DecisionList(dl.target, tuple(untag(r) for r in dl.rules), dl.combine, dl.tree_count)

"""Existential query evaluation over a fact base and cached example coverage."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .logic import Atom, PredicateGroup, Term

logger = logging.getLogger(__name__)


class FactBase:
    """Ground background atoms indexed by predicate, argument position and constant."""

    def __init__(self, facts: Iterable[Atom] = ()):
        self.facts: set[Atom] = set()
        self.relations: dict[tuple[str, int], list[tuple[Term, ...]]] = {}
        self.index: dict[tuple[str, int], list[dict[Term, list[tuple[Term, ...]]]]] = {}
        self._warned: set[tuple[str, int]] = set()
        for f in facts:
            self.add(f)

    def add(self, fact: Atom) -> None:
        if not fact.is_ground():
            raise ValueError(f"fact {fact} is not ground")
        if fact in self.facts:
            return
        self.facts.add(fact)
        sig = fact.signature
        self.relations.setdefault(sig, []).append(fact.args)
        positions = self.index.setdefault(sig, [{} for _ in range(fact.arity)])
        for pos, t in enumerate(fact.args):
            positions[pos].setdefault(t, []).append(fact.args)

    def __len__(self) -> int:
        return len(self.facts)

    def __contains__(self, fact: Atom) -> bool:
        return fact in self.facts

    def constants(self) -> set[Term]:
        return {t for f in self.facts for t in f.args}

    def warn_unknown(self, sig: tuple[str, int]) -> None:
        if sig not in self._warned:
            self._warned.add(sig)
            logger.warning("predicate %s/%d has no facts; treated as an empty relation", *sig)

    def candidates(self, a: Atom, binding: Mapping[Term, Term]) -> list[tuple[Term, ...]]:
        """Tuples of ``a``'s relation compatible with its constants and bound variables."""
        sig = a.signature
        positions = self.index.get(sig)
        if positions is None:
            self.warn_unknown(sig)
            return []
        best = None
        for pos, t in enumerate(a.args):
            if t.is_var:
                t = binding.get(t)
                if t is None:
                    continue
            rows = positions[pos].get(t, ())
            if best is None or len(rows) < len(best):
                best = rows
                if not rows:
                    break
        return list(self.relations[sig] if best is None else best)


def _unify_row(a: Atom, row, binding: dict) -> list | None:
    bound = []
    for s, t in zip(a.args, row):
        if s.is_var:
            cur = binding.get(s)
            if cur is None:
                binding[s] = t
                bound.append(s)
                continue
            s = cur
        if s != t:
            for v in bound:
                del binding[v]
            return None
    return bound


def satisfies(fb: FactBase, head_binding: Mapping[Term, Term], body: Sequence[Atom]) -> bool:
    """True iff some grounding of the free variables puts every body atom in ``fb``."""
    binding = dict(head_binding)
    remaining = list(body)

    def solve() -> bool:
        if not remaining:
            return True
        # pick the atom with the fewest matching rows under current bindings
        best_i, best_rows = 0, None
        for i, a in enumerate(remaining):
            rows = fb.candidates(a, binding)
            if best_rows is None or len(rows) < len(best_rows):
                best_i, best_rows = i, rows
                if not rows:
                    return False
        a = remaining.pop(best_i)
        for row in best_rows:
            bound = _unify_row(a, row, binding)
            if bound is None:
                continue
            if solve():
                remaining.insert(best_i, a)
                for v in bound:
                    del binding[v]
                return True
            for v in bound:
                del binding[v]
        remaining.insert(best_i, a)
        return False

    return solve()


@dataclass(frozen=True)
class Example:
    atom: Atom
    positive: bool


class ExampleSet:
    """Labelled ground target atoms; an example's id is its position."""

    def __init__(self, examples: Iterable[tuple[Atom, bool]] = ()):
        self.examples: list[Example] = []
        seen: set[Atom] = set()
        sig = None
        for atom, label in examples:
            if not atom.is_ground():
                raise ValueError(f"example {atom} is not ground")
            if sig is None:
                sig = atom.signature
            elif atom.signature != sig:
                raise ValueError(f"example {atom} does not match target {sig[0]}/{sig[1]}")
            if atom in seen:
                raise ValueError(f"duplicate example {atom}")
            seen.add(atom)
            self.examples.append(Example(atom, bool(label)))
        self.signature = sig

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self) -> Iterator[Example]:
        return iter(self.examples)

    def __getitem__(self, i: int) -> Example:
        return self.examples[i]

    @property
    def labels(self) -> list[int]:
        return [int(e.positive) for e in self.examples]


class CoverageSet:
    """A fixed-width bitset over example ids."""

    __slots__ = ("bits", "width")

    def __init__(self, bits: int = 0, width: int = 0):
        if bits < 0 or bits >> width:
            raise ValueError("bits outside the coverage width")
        self.bits = bits
        self.width = width

    @classmethod
    def empty(cls, width: int) -> CoverageSet:
        return cls(0, width)

    @classmethod
    def full(cls, width: int) -> CoverageSet:
        return cls((1 << width) - 1, width)

    @classmethod
    def from_ids(cls, ids: Iterable[int], width: int) -> CoverageSet:
        bits = 0
        for i in ids:
            bits |= 1 << i
        return cls(bits, width)

    def _check(self, other: CoverageSet) -> None:
        if other.width != self.width:
            raise ValueError(f"coverage widths differ: {self.width} vs {other.width}")

    def __and__(self, other: CoverageSet) -> CoverageSet:
        self._check(other)
        return CoverageSet(self.bits & other.bits, self.width)

    def __or__(self, other: CoverageSet) -> CoverageSet:
        self._check(other)
        return CoverageSet(self.bits | other.bits, self.width)

    def __sub__(self, other: CoverageSet) -> CoverageSet:
        self._check(other)
        return CoverageSet(self.bits & ~other.bits, self.width)

    def __invert__(self) -> CoverageSet:
        return CoverageSet(~self.bits & ((1 << self.width) - 1), self.width)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoverageSet):
            return NotImplemented
        return self.bits == other.bits and self.width == other.width

    def __hash__(self) -> int:
        return hash((self.bits, self.width))

    def __bool__(self) -> bool:
        return self.bits != 0

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __contains__(self, i: int) -> bool:
        return bool(self.bits >> i & 1)

    def __iter__(self) -> Iterator[int]:
        bits, i = self.bits, 0
        while bits:
            if bits & 1:
                yield i
            bits >>= 1
            i += 1

    def __repr__(self) -> str:
        return f"CoverageSet({sorted(self)}, width={self.width})"


def head_binding(target: Atom, ground: Atom) -> dict[Term, Term]:
    if target.signature != ground.signature:
        raise ValueError(f"{ground} does not match target {target}")
    return dict(zip(target.args, ground.args))


class CoverageCache:
    """Example coverage of predicate groups and clauses (the ES cache).

    Each distinct canonical group is evaluated against the examples once;
    clause coverage is the intersection of its groups' coverage.
    """

    def __init__(self, fb: FactBase, examples: ExampleSet, target: Atom):
        self.fb = fb
        self.examples = examples
        self.target = target
        self.width = len(examples)
        self._bindings = [head_binding(target, e.atom) for e in examples]
        self.groups: dict[str, CoverageSet] = {}
        self.clauses: dict[frozenset[str], CoverageSet] = {}
        self.evaluations = 0

    def group(self, g: PredicateGroup) -> CoverageSet:
        cov = self.groups.get(g.key)
        if cov is None:
            self.evaluations += 1
            cov = CoverageSet.from_ids(
                (i for i, b in enumerate(self._bindings) if satisfies(self.fb, b, g.atoms)),
                self.width,
            )
            self.groups[g.key] = cov
        return cov

    def clause(self, groups: Sequence[PredicateGroup]) -> CoverageSet:
        key = frozenset(g.key for g in groups)
        cov = self.clauses.get(key)
        if cov is None:
            cov = CoverageSet.full(self.width)
            for g in groups:
                cov = cov & self.group(g)
            self.clauses[key] = cov
        return cov


def group_coverage(fb: FactBase, ex: ExampleSet, g: PredicateGroup, target: Atom, cache: CoverageCache | None = None) -> CoverageSet:
    if cache is None:
        cache = CoverageCache(fb, ex, target)
    return cache.group(g)


def clause_coverage(groups: Sequence[PredicateGroup], cache: CoverageCache) -> CoverageSet:
    return cache.clause(groups)

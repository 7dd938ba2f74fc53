"""Theta-subsumption between positive atom sets with frozen head variables."""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import CompressionAborted, SearchBudgetExceeded
from .logic import Atom, Clause, PredicateGroup, Term

logger = logging.getLogger(__name__)

_CLOCK_EVERY = 1024


@dataclass(frozen=True)
class SearchBudget:
    max_backtracks: int = 10**6
    seconds: float = 5.0

    def __post_init__(self):
        if self.max_backtracks <= 0 or self.seconds <= 0:
            raise ValueError("search budget limits must be strictly positive")


DEFAULT_BUDGET = SearchBudget()


def _candidates(a: Atom, index: dict, frozen: frozenset[Term]) -> list[Atom]:
    out = []
    for b in index.get(a.signature, ()):
        for s, t in zip(a.args, b.args):
            if (not s.is_var or s in frozen) and s != t:
                break
        else:
            out.append(b)
    return out


def subsumption_search(
    A: Sequence[Atom],
    B: Sequence[Atom],
    frozen: Iterable[Term] = (),
    budget: SearchBudget | None = DEFAULT_BUDGET,
) -> tuple[bool, int]:
    """Decide whether ``A`` theta-subsumes ``B``; also return the step count.

    Non-frozen variables of ``A`` may map to any term of ``B``. Variables of
    ``B`` behave as fresh constants, and frozen variables only match
    themselves. Raises :class:`SearchBudgetExceeded` when the budget runs out.
    """
    frozen = frozenset(frozen)
    index: dict[tuple[str, int], list[Atom]] = {}
    for b in dict.fromkeys(B):
        index.setdefault(b.signature, []).append(b)

    pending = []
    for a in dict.fromkeys(A):
        cands = _candidates(a, index, frozen)
        if not cands:
            return False, 0
        pending.append((a, cands))

    # most-constrained first, preferring atoms that touch already-ordered variables
    order: list[tuple[Atom, list[Atom]]] = []
    seen_vars: set[Term] = set()
    while pending:
        best = min(
            range(len(pending)),
            key=lambda i: (
                len(pending[i][1]),
                -len({t for t in pending[i][0].args if t.is_var} & seen_vars),
            ),
        )
        a, cands = pending.pop(best)
        order.append((a, cands))
        seen_vars |= {t for t in a.args if t.is_var and t not in frozen}

    max_steps = budget.max_backtracks if budget else None
    deadline = time.monotonic() + budget.seconds if budget else None
    theta: dict[Term, Term] = {}
    steps = 0

    def match(i: int) -> bool:
        nonlocal steps
        if i == len(order):
            return True
        a, cands = order[i]
        for b in cands:
            steps += 1
            if max_steps is not None:
                if steps > max_steps:
                    raise SearchBudgetExceeded(steps)
                if steps % _CLOCK_EVERY == 0 and time.monotonic() > deadline:
                    raise SearchBudgetExceeded(steps)
            bound = []
            ok = True
            for s, t in zip(a.args, b.args):
                if not s.is_var or s in frozen:
                    continue
                cur = theta.get(s)
                if cur is None:
                    theta[s] = t
                    bound.append(s)
                elif cur != t:
                    ok = False
                    break
            if ok and match(i + 1):
                return True
            for s in bound:
                del theta[s]
        return False

    return match(0), steps


def theta_subsumes(A, B, frozen=(), budget: SearchBudget | None = DEFAULT_BUDGET) -> bool:
    return subsumption_search(A, B, frozen, budget)[0]


def clause_reduction(c: Clause, budget: SearchBudget | None = DEFAULT_BUDGET) -> Clause:
    """Greedily drop body atoms while the shorter clause stays equivalent.

    Atoms are tried from the end of the body so that earlier atoms survive.
    A removal test that runs out of budget keeps the atom.
    """
    body = list(c.body)
    head = c.head_vars
    changed = True
    while changed:
        changed = False
        for i in range(len(body) - 1, -1, -1):
            shorter = body[:i] + body[i + 1 :]
            try:
                redundant = theta_subsumes(body, shorter, head, budget)
            except SearchBudgetExceeded:
                logger.debug("reduction test for %s gave up; keeping it", body[i])
                redundant = False
            if redundant:
                body = shorter
                changed = True
    if len(body) == len(c.body):
        return c
    return c.with_body(body)


class SubsumptionMatrix:
    """Cached pairwise subsumption between distinct predicate groups.

    ``cells[i][j]`` is true iff group ``i`` theta-subsumes group ``j``. Cells
    whose search ran out of budget are stored as false.
    """

    def __init__(self, budget: SearchBudget | None = DEFAULT_BUDGET):
        self.budget = budget
        self.keys: list[str] = []
        self.index: dict[str, int] = {}
        self.groups: list[PredicateGroup] = []
        self.cells: list[list[bool]] = []
        self.aborted_cells = 0
        self.diagnostics: list[tuple[str, str, str, int]] = []

    def __len__(self) -> int:
        return len(self.keys)

    def __contains__(self, key: str) -> bool:
        return key in self.index

    def _test(self, g: PredicateGroup, h: PredicateGroup) -> bool:
        if g.key == h.key:
            self.diagnostics.append((g.key, h.key, "true", 0))
            return True
        frozen = g.head_vars | h.head_vars
        try:
            result, steps = subsumption_search(g.atoms, h.atoms, frozen, self.budget)
        except SearchBudgetExceeded as exc:
            self.aborted_cells += 1
            self.diagnostics.append((g.key, h.key, "budget_exceeded", exc.steps))
            return False
        self.diagnostics.append((g.key, h.key, "true" if result else "false", steps))
        return result

    def add(self, g: PredicateGroup, deadline: float | None = None) -> int:
        """Add ``g`` (if new) and fill its row and column; return its index."""
        if g.key in self.index:
            return self.index[g.key]
        n = len(self.keys)
        row = []
        for h in self.groups:
            if deadline is not None and time.monotonic() > deadline:
                raise CompressionAborted("subsumption-matrix", {"groups_done": n})
            row.append(self._test(g, h))
        for i, h in enumerate(self.groups):
            self.cells[i].append(self._test(h, g))
        row.append(True)
        self.cells.append(row)
        self.keys.append(g.key)
        self.groups.append(g)
        self.index[g.key] = n
        return n

    def subsumes(self, g: PredicateGroup | str, h: PredicateGroup | str) -> bool:
        if isinstance(g, PredicateGroup):
            i = self.add(g)
        else:
            i = self.index[g]
        if isinstance(h, PredicateGroup):
            j = self.add(h)
        else:
            j = self.index[h]
        return self.cells[i][j]

    def write_diagnostics(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["key_i", "key_j", "result", "backtracks"])
            w.writerows(self.diagnostics)


def build_subsumption_matrix(
    groups: Iterable[PredicateGroup],
    budget: SearchBudget | None = DEFAULT_BUDGET,
    deadline: float | None = None,
) -> SubsumptionMatrix:
    sm = SubsumptionMatrix(budget)
    for g in groups:
        sm.add(g, deadline)
    if sm.aborted_cells:
        logger.warning("%d subsumption cells exceeded the search budget", sm.aborted_cells)
    return sm

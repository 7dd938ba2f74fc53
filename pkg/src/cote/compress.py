"""Merge an ensemble of decision lists into one compressed list.

Both compressors share the preprocessing step (:func:`prep`) and the
lexicographic merge of two lists. :func:`scote` removes redundancy that is
provable by theta-subsumption and keeps the result logically equivalent to
the ensemble. :func:`ecote` drops and shortens rules using example coverage
on the training data, which bounds the output size by the number of examples.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .coverage import CoverageCache, CoverageSet, ExampleSet, FactBase, head_binding, satisfies
from .errors import CompressionAborted, SearchBudgetExceeded
from .logic import (
    Atom,
    Clause,
    DecisionList,
    PredicateGroup,
    group_indices,
    standardize_apart,
)
from .subsumption import (
    DEFAULT_BUDGET,
    SearchBudget,
    SubsumptionMatrix,
    build_subsumption_matrix,
    clause_reduction,
    theta_subsumes,
)
from .trees import TildeTree, tree_to_list

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Rule:
    """A clause together with its predicate groups and their body positions."""

    clause: Clause
    groups: tuple[PredicateGroup, ...]
    spans: tuple[tuple[int, ...], ...]

    @classmethod
    def of(cls, clause: Clause) -> Rule:
        spans = group_indices(clause)
        groups = tuple(
            PredicateGroup(tuple(clause.body[i] for i in idx), clause.head_vars, clause.provenance)
            for idx in spans
        )
        return cls(clause, groups, tuple(tuple(s) for s in spans))

    def keep(self, kept: Sequence[int]) -> Rule:
        """Restrict to the groups at positions ``kept``, preserving body order."""
        if len(kept) == len(self.groups):
            return self
        positions = sorted(i for g in kept for i in self.spans[g])
        remap = {old: new for new, old in enumerate(positions)}
        clause = self.clause.with_body(self.clause.body[i] for i in positions)
        groups = tuple(self.groups[g] for g in kept)
        spans = tuple(tuple(remap[i] for i in self.spans[g]) for g in kept)
        return Rule(clause, groups, spans)


@dataclass
class MergeStats:
    iteration: int
    candidates: int
    kept: int


@dataclass
class CompressionResult:
    decision_list: DecisionList
    mode: str
    iterations: list[MergeStats] = field(default_factory=list)
    groups: int = 0
    aborted_cells: int = 0
    subsumption_matrix: SubsumptionMatrix | None = None
    coverage: CoverageCache | None = None


def prep(
    trees: Sequence[TildeTree],
    budget: SearchBudget | None = DEFAULT_BUDGET,
    reduce: bool = True,
) -> tuple[list[list[Rule]], list[PredicateGroup]]:
    """Convert each tree to a positive decision list and collect distinct groups.

    Rules are self-reduced and standardized apart by tree index (tag ``t<i>``).
    The returned groups are deduplicated by canonical key.
    """
    if not trees:
        raise ValueError("cannot compress an empty ensemble")
    target = trees[0].target
    for i, t in enumerate(trees):
        if t.target.signature != target.signature:
            raise ValueError(
                f"tree {i} predicts {t.target.predicate}/{t.target.arity}, "
                f"expected {target.predicate}/{target.arity}"
            )
        if t.target != target:
            raise ValueError(f"tree {i} uses head {t.target}, expected {target}")

    lists: list[list[Rule]] = []
    groups: dict[str, PredicateGroup] = {}
    for i, t in enumerate(trees):
        rules = []
        for c in tree_to_list(t, i).rules:
            if reduce:
                c = clause_reduction(c, budget)
            r = Rule.of(standardize_apart(c, f"t{i}"))
            rules.append(r)
            for g in r.groups:
                groups.setdefault(g.key, g)
        lists.append(rules)
    return lists, list(groups.values())


def add_clauses(cj: Clause, ck: Clause) -> Clause:
    """Conjoin two standardized-apart rules; values are added."""
    if cj.head != ck.head:
        raise ValueError(f"cannot combine rules with heads {cj.head} and {ck.head}")
    shared = cj.local_vars() & ck.local_vars()
    if shared:
        names = ", ".join(sorted(v.name for v in shared))
        raise AssertionError(f"rules are not standardized apart; shared variables: {names}")
    return Clause(cj.head, cj.body + ck.body, cj.value + ck.value, cj.provenance + ck.provenance)


def _add_rules(rj: Rule, rk: Rule) -> Rule:
    c = add_clauses(rj.clause, rk.clause)
    off = len(rj.clause.body)
    spans = rj.spans + tuple(tuple(i + off for i in s) for s in rk.spans)
    return Rule(c, rj.groups + rk.groups, spans)


def merge_order(n_left: int, n_right: int) -> list[tuple[int, int]]:
    """Lexicographic pairing of two lists (left index outer)."""
    return [(j, k) for j in range(n_left) for k in range(n_right)]


# -- subsumption-based reduction ------------------------------------------------


def _reduce_rule(r: Rule, sm: SubsumptionMatrix) -> Rule:
    kept = list(range(len(r.groups)))
    changed = True
    while changed:
        changed = False
        for pos, g in enumerate(kept):
            gg = r.groups[g]
            for h in kept:
                if h == g:
                    continue
                hh = r.groups[h]
                if not sm.subsumes(gg, hh):
                    continue
                # mutual subsumption: the later group goes, so keep g for now
                if h > g and sm.subsumes(hh, gg):
                    continue
                del kept[pos]
                changed = True
                break
            if changed:
                break
    return r.keep(kept)


def reduce_clause(c: Clause, sm: SubsumptionMatrix) -> Clause:
    """Drop every predicate group that theta-subsumes another group of ``c``."""
    return _reduce_rule(Rule.of(c), sm).clause


def _rule_subsumes(rj: Rule, rk: Rule, sm: SubsumptionMatrix, exact: bool, budget) -> bool:
    if exact:
        try:
            return theta_subsumes(rj.clause.body, rk.clause.body, rj.clause.head_vars, budget)
        except SearchBudgetExceeded:
            pass
    return all(any(sm.subsumes(g, h) for h in rk.groups) for g in rj.groups)


def _reduce_rules(
    rules: Sequence[Rule],
    sm: SubsumptionMatrix,
    exact: bool = False,
    budget: SearchBudget | None = DEFAULT_BUDGET,
    deadline: float | None = None,
) -> list[Rule]:
    kept: list[Rule] = []
    last = len(rules) - 1
    for i, rk in enumerate(rules):
        if deadline is not None and i % 16 == 0 and time.monotonic() > deadline:
            raise CompressionAborted("list-reduction", {"rules_checked": i, "rules_kept": len(kept)})
        if i != last and any(_rule_subsumes(rj, rk, sm, exact, budget) for rj in kept):
            continue
        kept.append(rk)
    return kept


def reduce_list(
    clauses: Sequence[Clause],
    sm: SubsumptionMatrix,
    exact: bool = False,
    budget: SearchBudget | None = DEFAULT_BUDGET,
) -> list[Clause]:
    """Remove every rule that an earlier kept rule theta-subsumes (it can never fire).

    The final rule is always kept.
    """
    return [r.clause for r in _reduce_rules([Rule.of(c) for c in clauses], sm, exact, budget)]


def _finish(rules: Sequence[Rule], target: Atom, combine: str, n_trees: int) -> DecisionList:
    return DecisionList(target, tuple(r.clause for r in rules), combine, n_trees)


def scote(
    lists: Sequence[Sequence[Rule]],
    groups: Sequence[PredicateGroup],
    budget: SearchBudget | None = DEFAULT_BUDGET,
    combine: str = "sum",
    deadline: float | None = None,
    exact: bool = False,
    on_iteration: Callable[[MergeStats], None] | None = None,
) -> CompressionResult:
    """Subsumption-based compression; the output is logically equivalent to the ensemble.

    ``deadline`` is an absolute :func:`time.monotonic` value. When it passes,
    :class:`CompressionAborted` is raised with the progress made so far.
    """
    if not lists:
        raise ValueError("no decision lists to merge")
    t0 = time.monotonic()
    sm = build_subsumption_matrix(groups, budget, deadline)
    logger.info("subsumption matrix: %d groups in %.2fs", len(sm), time.monotonic() - t0)

    stats: list[MergeStats] = []
    current = list(lists[0])
    for it in range(1, len(lists)):
        nxt = lists[it]
        merged = []
        for n, (j, k) in enumerate(merge_order(len(current), len(nxt))):
            if deadline is not None and n % 64 == 0 and time.monotonic() > deadline:
                raise CompressionAborted(
                    "merge",
                    {"iteration": it, "pairs_done": n, "rules": len(current), "groups": len(sm),
                     "aborted_cells": sm.aborted_cells},
                )
            merged.append(_reduce_rule(_add_rules(current[j], nxt[k]), sm))
        try:
            current = _reduce_rules(merged, sm, exact, budget, deadline)
        except CompressionAborted as exc:
            exc.progress.update(iteration=it, candidates=len(merged), aborted_cells=sm.aborted_cells)
            raise
        s = MergeStats(it, len(merged), len(current))
        stats.append(s)
        if on_iteration:
            on_iteration(s)

    dl = _finish(current, current[0].clause.head, combine, len(lists))
    return CompressionResult(dl, "scote", stats, len(sm), sm.aborted_cells, subsumption_matrix=sm)


# -- example-based pruning -----------------------------------------------------


def check_coverage(groups: Sequence[PredicateGroup], es: CoverageCache, ec: CoverageSet) -> CoverageSet:
    """Examples the rule would newly claim: its coverage minus those already claimed."""
    return es.clause(groups) - ec


def _prune_rule(r: Rule, es: CoverageCache) -> Rule:
    raw = es.clause(r.groups)
    kept = list(range(len(r.groups)))
    changed = True
    while changed and len(kept) > 1:
        changed = False
        for pos in range(len(kept)):
            rest = kept[:pos] + kept[pos + 1 :]
            if es.clause([r.groups[g] for g in rest]) == raw:
                kept = rest
                changed = True
                break
    return r.keep(kept)


def prune_clause(c: Clause, es: CoverageCache) -> Clause:
    """Drop groups whose removal leaves the clause's training coverage unchanged.

    At least one group is kept so a non-final rule never becomes a catch-all.
    """
    return _prune_rule(Rule.of(c), es).clause


def _coverage_pass(candidates, es: CoverageCache, deadline, it) -> list[Rule]:
    claimed = CoverageSet.empty(es.width)
    out = []
    last = len(candidates) - 1
    for n, make in enumerate(candidates):
        if deadline is not None and n % 64 == 0 and time.monotonic() > deadline:
            raise CompressionAborted("merge", {"iteration": it, "pairs_done": n, "rules": len(out)})
        r = make()
        active = check_coverage(r.groups, es, claimed)
        if n == last:
            out.append(r)
        elif active:
            out.append(_prune_rule(r, es))
            claimed = claimed | es.clause(r.groups)
    return out


def ecote(
    lists: Sequence[Sequence[Rule]],
    groups: Sequence[PredicateGroup],
    fb: FactBase,
    examples: ExampleSet,
    combine: str = "sum",
    deadline: float | None = None,
    on_iteration: Callable[[MergeStats], None] | None = None,
) -> CompressionResult:
    """Example-based compression; faithful to the ensemble on every training example."""
    if not lists:
        raise ValueError("no decision lists to merge")
    target = lists[0][0].clause.head
    es = CoverageCache(fb, examples, target)
    for g in groups:
        if deadline is not None and time.monotonic() > deadline:
            raise CompressionAborted("coverage", {"groups_done": len(es.groups)})
        es.group(g)

    stats: list[MergeStats] = []
    first = lists[0]
    current = _coverage_pass([lambda r=r: r for r in first], es, deadline, 0)
    stats.append(MergeStats(0, len(first), len(current)))
    if on_iteration:
        on_iteration(stats[-1])
    for it in range(1, len(lists)):
        nxt = lists[it]
        pairs = merge_order(len(current), len(nxt))
        makers = [lambda j=j, k=k, cur=current: _add_rules(cur[j], nxt[k]) for j, k in pairs]
        current = _coverage_pass(makers, es, deadline, it)
        stats.append(MergeStats(it, len(pairs), len(current)))
        if on_iteration:
            on_iteration(stats[-1])

    dl = _finish(current, target, combine, len(lists))
    return CompressionResult(dl, "ecote", stats, len(es.groups), coverage=es)


def compress(
    trees: Sequence[TildeTree],
    mode: str,
    combine: str = "sum",
    fb: FactBase | None = None,
    examples: ExampleSet | None = None,
    budget: SearchBudget | None = DEFAULT_BUDGET,
    seconds: float | None = None,
    exact: bool = False,
    on_iteration: Callable[[MergeStats], None] | None = None,
) -> CompressionResult:
    """Run preprocessing followed by the chosen compressor (``scote`` or ``ecote``)."""
    deadline = time.monotonic() + seconds if seconds else None
    lists, groups = prep(trees, budget)
    if mode == "scote":
        return scote(lists, groups, budget, combine, deadline, exact, on_iteration)
    if mode == "ecote":
        if fb is None or examples is None:
            raise ValueError("ecote needs a fact base and training examples")
        return ecote(lists, groups, fb, examples, combine, deadline, on_iteration)
    raise ValueError(f"unknown compression mode {mode!r}")


def predict(dl: DecisionList, fb: FactBase, ground: Atom) -> float:
    """Value of the first rule whose body holds for ``ground``."""
    binding = head_binding(dl.target, ground)
    for r in dl.rules:
        if satisfies(fb, binding, r.body):
            return dl.effective_value(r)
    raise AssertionError("decision list without a catch-all rule")

import random
import time

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cote.compress import (
    Rule,
    add_clauses,
    compress,
    ecote,
    merge_order,
    predict,
    prep,
    prune_clause,
    reduce_clause,
    reduce_list,
    scote,
)
from cote.coverage import CoverageCache, ExampleSet
from cote.errors import CompressionAborted
from cote.io import parse_atom, parse_conjunction, parse_facts
from cote.logic import Atom, Clause, standardize_apart
from cote.subsumption import build_subsumption_matrix
from cote.synthetic import constants_heavy_ensemble, random_examples
from cote.trees import Leaf, TildeTree, eval_ensemble

from conftest import DOMAIN, HEAD, ITEMS, PEOPLE, advising, small_ensemble, small_facts

ADV = parse_atom("AdvisedBy(a,b)")
INSTANCES = [Atom("T", (p, i)) for p in PEOPLE for i in ITEMS]


def clause(body, value=0.0, head=ADV):
    return Clause(head, tuple(parse_conjunction(body)) if body else (), value)


def test_prep_rejects_empty_and_mismatched_targets():
    with pytest.raises(ValueError):
        prep([])
    t = advising()[0]
    other = TildeTree(parse_atom("Other(a,b)"), Leaf(0.0))
    with pytest.raises(ValueError):
        prep([t, other])


def test_prep_standardizes_apart_and_dedups_groups():
    lists, groups = prep(advising())
    assert [len(l) for l in lists] == [5, 5]
    v0 = set().union(*(r.clause.local_vars() for r in lists[0]))
    v1 = set().union(*(r.clause.local_vars() for r in lists[1]))
    assert not v0 & v1
    assert len({g.key for g in groups}) == len(groups)


def test_add_clauses_requires_disjoint_locals():
    a = clause("Publication(c,a)", 0.5)
    with pytest.raises(AssertionError):
        add_clauses(a, a)
    out = add_clauses(standardize_apart(a, "t0"), standardize_apart(a, "t1"))
    assert len(out.body) == 2 and out.value == 1.0


def test_merge_order_is_lexicographic():
    assert merge_order(2, 3) == [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)]


def test_reduce_clause_drops_subsuming_group():
    c = clause("Professor(b), Publication(c,a), Publication(c,b), Publication(e,b), Publication(e,a)")
    out = reduce_clause(c, build_subsumption_matrix([]))
    assert [str(a) for a in out.body] == ["Professor(b)", "Publication(c,a)", "Publication(c,b)"]


def test_reduce_clause_mutual_subsumption_keeps_first():
    c = clause("Publication(c,a), Publication(e,a)")
    out = reduce_clause(c, build_subsumption_matrix([]))
    assert [str(a) for a in out.body] == ["Publication(c,a)"]


def test_reduce_list_keeps_final_rule_and_removes_shadowed():
    rules = [clause("Professor(b)", 1.0), clause("Professor(b), Student(a)", 2.0), clause("", 3.0)]
    out = reduce_list(rules, build_subsumption_matrix([]))
    assert [r.value for r in out] == [1.0, 3.0]
    only = [clause("", 1.0)]
    assert reduce_list(only, build_subsumption_matrix([])) == only


def test_scote_advising_counts():
    res = compress(advising(), "scote")
    assert len(res.decision_list) == 20
    assert res.iterations[0].candidates == 25 and res.iterations[0].kept == 20


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["sum", "average"]), st.booleans())
def test_scote_equivalence_property(seed, combine, exact):
    rng = random.Random(seed)
    trees = small_ensemble(rng)
    fb = small_facts(rng)
    dl = compress(trees, "scote", combine, exact=exact).decision_list
    assert dl.tree_count == len(trees)
    for g in INSTANCES:
        assert predict(dl, fb, g) == eval_ensemble(trees, fb, g, combine)


def test_single_tree_scote_is_the_tree():
    trees = advising()[:1]
    dl = compress(trees, "scote").decision_list
    assert [r.value for r in dl.rules] == [0.9, 0.4, 0.3, -0.2, -0.8]


def _ex(pos, neg):
    return ExampleSet([(parse_atom(p), True) for p in pos] + [(parse_atom(n), False) for n in neg])


def test_prune_clause_keeps_last_group():
    fb = parse_facts("Professor(P1)\n")
    es = CoverageCache(fb, _ex(["AdvisedBy(S1,P1)"], ["AdvisedBy(P1,S1)"]), ADV)
    c = clause("Professor(b)")
    assert prune_clause(c, es) == c


def test_prune_clause_drops_irrelevant_group():
    fb = parse_facts("Professor(P1)\nPublication(T1,S1)\nPublication(T1,P1)\n")
    es = CoverageCache(fb, _ex(["AdvisedBy(S1,P1)"], ["AdvisedBy(P1,S1)"]), ADV)
    c = clause("Professor(b), Publication(c,a)")
    assert [str(a) for a in prune_clause(c, es).body] == ["Professor(b)"]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["sum", "average"]))
def test_ecote_faithful_property(seed, combine):
    rng = random.Random(seed)
    trees = small_ensemble(rng)
    fb = small_facts(rng)
    examples = random_examples(rng, HEAD, DOMAIN, rng.randint(5, 30))
    sizes = []
    res = compress(trees, "ecote", combine, fb, examples, on_iteration=lambda s: sizes.append(s.kept))
    assert len(sizes) == len(trees)
    assert all(k <= len(examples) + 1 for k in sizes)
    assert not res.decision_list.rules[-1].body
    for e in examples:
        assert predict(res.decision_list, fb, e.atom) == eval_ensemble(trees, fb, e.atom, combine)


def test_ecote_requires_examples():
    with pytest.raises(ValueError):
        compress(advising(), "ecote")
    with pytest.raises(ValueError):
        compress(advising(), "fast")


def test_scote_deadline_aborts_with_phase():
    trees = constants_heavy_ensemble(random.Random(1), n_trees=10)
    lists, groups = prep(trees)
    t0 = time.monotonic()
    with pytest.raises(CompressionAborted) as info:
        scote(lists, groups, deadline=time.monotonic() + 0.5)
    assert time.monotonic() - t0 < 30
    assert info.value.phase in {"subsumption-matrix", "merge", "list-reduction"}
    assert isinstance(info.value.progress, dict)


def test_ecote_deadline_in_the_past_aborts():
    rng = random.Random(3)
    trees = small_ensemble(rng, n_trees=3, depth=3)
    lists, groups = prep(trees)
    fb = small_facts(rng)
    with pytest.raises(CompressionAborted):
        ecote(lists, groups, fb, random_examples(rng, HEAD, DOMAIN, 10), deadline=time.monotonic() - 1)


def test_average_mode_predicts_mean():
    dl = compress(advising(), "scote", "average").decision_list
    fb = parse_facts("Professor(P1)\n")
    g = parse_atom("AdvisedBy(S1,P1)")
    assert predict(dl, fb, g) == (-0.2 + -0.6) / 2


def test_rule_keep_preserves_body_order():
    r = Rule.of(clause("Professor(b), Publication(c,a), Student(a), Publication(c,b)"))
    kept = r.keep([1, 2])
    assert [str(a) for a in kept.clause.body] == ["Publication(c,a)", "Student(a)", "Publication(c,b)"]

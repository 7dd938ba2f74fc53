import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cote.coverage import (
    CoverageCache,
    CoverageSet,
    ExampleSet,
    FactBase,
    clause_coverage,
    group_coverage,
    head_binding,
    satisfies,
)
from cote.io import parse_atom, parse_conjunction
from cote.logic import Clause, const, literal_groups, var

from conftest import DOMAIN, HEAD, random_body, small_facts
from oracles import brute_satisfies

ADV = parse_atom("AdvisedBy(a,b)")


def fb_of(*facts):
    return FactBase(parse_atom(f) for f in facts)


def test_satisfies_joins_on_shared_variables():
    fb = fb_of("Publication(T1,S1)", "Publication(T1,P1)", "Publication(T2,S2)")
    body = parse_conjunction("Publication(c,a), Publication(c,b)")
    assert satisfies(fb, head_binding(ADV, parse_atom("AdvisedBy(S1,P1)")), body)
    assert not satisfies(fb, head_binding(ADV, parse_atom("AdvisedBy(S2,P1)")), body)


def test_satisfies_empty_body_and_constants():
    fb = fb_of('YearsInProgram(S1,"year6")')
    assert satisfies(fb, {}, [])
    body = parse_conjunction('YearsInProgram(a,"year6")')
    assert satisfies(fb, {var("a"): const("S1")}, body)
    assert not satisfies(fb, {var("a"): const("S2")}, body)


def test_unknown_predicate_is_unsatisfied(caplog):
    fb = fb_of("P(A)")
    assert not satisfies(fb, {}, parse_conjunction("Q(x)"))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6))
def test_satisfies_matches_enumeration(seed):
    rng = random.Random(seed)
    fb = small_facts(rng)
    body = random_body(rng, rng.randint(0, 4), constants=("A0", "B2"))
    g = (rng.choice(DOMAIN), rng.choice(DOMAIN))
    binding = dict(zip(HEAD.args, g))
    assert satisfies(fb, binding, body) == brute_satisfies(fb.facts, binding, body, DOMAIN)


def test_example_set_validation():
    with pytest.raises(ValueError):
        ExampleSet([(parse_atom("T(A,B)"), True), (parse_atom("T(A,B)"), False)])
    with pytest.raises(ValueError):
        ExampleSet([(parse_atom("T(A,B)"), True), (parse_atom("U(A)"), False)])
    with pytest.raises(ValueError):
        ExampleSet([(parse_atom("T(A,x)"), True)])
    ex = ExampleSet([(parse_atom("T(A,B)"), True), (parse_atom("T(B,A)"), False)])
    assert ex.labels == [1, 0]


def test_coverage_set_algebra():
    a = CoverageSet.from_ids([0, 2, 3], 5)
    b = CoverageSet.from_ids([2, 4], 5)
    assert list(a & b) == [2]
    assert list(a | b) == [0, 2, 3, 4]
    assert list(a - b) == [0, 3]
    assert list(~a) == [1, 4]
    assert len(a) == 3 and 3 in a and 1 not in a
    assert not CoverageSet.empty(5) and len(CoverageSet.full(5)) == 5
    with pytest.raises(ValueError):
        a & CoverageSet.empty(6)
    with pytest.raises(ValueError):
        CoverageSet(1 << 5, 5)


@settings(max_examples=100, deadline=None)
@given(st.sets(st.integers(0, 99)), st.sets(st.integers(0, 99)))
def test_coverage_set_matches_python_sets(x, y):
    a, b = CoverageSet.from_ids(x, 100), CoverageSet.from_ids(y, 100)
    assert set(a & b) == x & y
    assert set(a | b) == x | y
    assert set(a - b) == x - y
    assert set(~a) == set(range(100)) - x


def test_cache_reuses_variant_groups():
    fb = fb_of("Publication(T1,S1)", "Publication(T1,P1)", "Professor(P1)")
    ex = ExampleSet([(parse_atom("AdvisedBy(S1,P1)"), True), (parse_atom("AdvisedBy(P1,S1)"), False)])
    cache = CoverageCache(fb, ex, ADV)
    c1 = Clause(ADV, tuple(parse_conjunction("Professor(b), Publication(c,a), Publication(c,b)")))
    c2 = Clause(ADV, tuple(parse_conjunction("Professor(b), Publication(e,b), Publication(e,a)")))
    cov1 = cache.clause(literal_groups(c1))
    evals = cache.evaluations
    cov2 = cache.clause(literal_groups(c2))
    assert list(cov1) == [0] and cov1 == cov2
    assert cache.evaluations == evals
    g = literal_groups(c1)[0]
    assert group_coverage(fb, ex, g, ADV) == cache.group(g)
    assert clause_coverage(literal_groups(c1), cache) == cov1


def test_empty_clause_covers_everything():
    fb = fb_of("P(A)")
    ex = ExampleSet([(parse_atom("AdvisedBy(A,B)"), True), (parse_atom("AdvisedBy(B,A)"), False)])
    assert len(CoverageCache(fb, ex, ADV).clause([])) == 2

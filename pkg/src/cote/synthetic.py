"""Synthetic relational fixtures: random ensembles, fact bases and a UW-CSE-like domain.

The generators only need a ``random.Random`` instance, so every fixture is
reproducible from a seed.
"""

from __future__ import annotations

import hashlib
import itertools
import random
from typing import Sequence

from .coverage import ExampleSet, FactBase
from .logic import Atom, Term, const, var
from .trees import Inner, Leaf, TildeTree


def random_tree(
    rng: random.Random,
    target: Atom,
    predicates: dict[str, int],
    depth: int,
    constants: Sequence[Term] = (),
    p_split: float = 0.8,
    p_const: float = 0.1,
    p_conj: float = 0.2,
    p_new_var: float = 0.4,
) -> TildeTree:
    """A random tree of at most ``depth`` test levels.

    Variables introduced by a test are visible only below its yes branch.
    """
    counter = [0]

    def fresh() -> Term:
        counter[0] += 1
        return var(f"v{counter[0]}")

    def atom(scope: list[Term]) -> Atom:
        name = rng.choice(sorted(predicates))
        args = []
        for _ in range(predicates[name]):
            r = rng.random()
            if constants and r < p_const:
                args.append(rng.choice(constants))
            elif r < p_const + p_new_var:
                v = fresh()
                scope.append(v)
                args.append(v)
            else:
                args.append(rng.choice(scope))
        return Atom(name, tuple(args))

    def build(level: int, scope: list[Term], root: bool):
        if level >= depth or (not root and rng.random() > p_split):
            return Leaf(round(rng.uniform(-1.0, 1.0), 3))
        inner_scope = list(scope)
        tests = [atom(inner_scope)]
        while rng.random() < p_conj and len(tests) < 3:
            tests.append(atom(inner_scope))
        return Inner(tuple(tests), build(level + 1, inner_scope, False), build(level + 1, scope, False))

    return TildeTree(target, build(0, list(target.args), True))


def random_ensemble(rng, target, predicates, n_trees, depth, constants=(), **kw) -> list[TildeTree]:
    return [random_tree(rng, target, predicates, depth, constants, **kw) for _ in range(n_trees)]


def random_fact_base(
    rng: random.Random, predicates: dict[str, int], constants: Sequence[Term], density: float = 0.3
) -> FactBase:
    """Each possible ground atom is a fact with probability ``density``."""
    facts = []
    for name in sorted(predicates):
        for args in itertools.product(constants, repeat=predicates[name]):
            if rng.random() < density:
                facts.append(Atom(name, tuple(args)))
    return FactBase(facts)


def ground_instances(target: Atom, constants: Sequence[Term]) -> list[Atom]:
    return [Atom(target.predicate, tuple(c)) for c in itertools.product(constants, repeat=target.arity)]


def random_examples(rng, target: Atom, constants, n: int) -> ExampleSet:
    pool = ground_instances(target, constants)
    rng.shuffle(pool)
    return ExampleSet((a, rng.random() < 0.5) for a in pool[:n])


# -- a small university domain --------------------------------------------------

UW_PREDICATES = {
    "Professor": 1,
    "Student": 1,
    "Publication": 2,
    "YearsInProgram": 2,
    "TaughtBy": 3,
    "Ta": 3,
}
ADVISED_BY = Atom("AdvisedBy", (var("a"), var("b")))


def uwcse_domain(
    rng: random.Random,
    n_professors: int = 8,
    n_students: int = 24,
    n_examples: int = 200,
    n_courses: int = 8,
    n_papers: int = 40,
) -> tuple[FactBase, ExampleSet]:
    """Professors, students, papers and courses with AdvisedBy examples.

    Advisors co-author with their students, and a student who co-authors
    with a professor has been a TA of one of that professor's courses.
    Examples are person pairs; positives are advisor pairs.
    """
    profs = [const(f"P{i}") for i in range(n_professors)]
    studs = [const(f"S{i}") for i in range(n_students)]
    courses = [const(f"C{i}") for i in range(n_courses)]
    papers = [const(f"T{i}") for i in range(n_papers)]
    quarters = [const(f"Q{i}") for i in range(3)]
    years = [const(f'"year{i}"') for i in range(1, 7)]

    facts: list[Atom] = []
    facts += [Atom("Professor", (p,)) for p in profs]
    facts += [Atom("Student", (s,)) for s in studs]
    advisor = {s: rng.choice(profs) for s in studs}
    for s in studs:
        facts.append(Atom("YearsInProgram", (s, rng.choice(years))))
    teaching = []
    for c in courses:
        p = rng.choice(profs)
        q = rng.choice(quarters)
        facts.append(Atom("TaughtBy", (c, p, q)))
        teaching.append((c, p, q))
    for paper in papers:
        s = rng.choice(studs)
        authors = {s, advisor[s]}
        if rng.random() < 0.3:
            authors.add(rng.choice(profs))
        if rng.random() < 0.3:
            authors.add(rng.choice(studs))
        for a in authors:
            facts.append(Atom("Publication", (paper, a)))
    # every professor publishes something
    for p in profs:
        if not any(f.predicate == "Publication" and f.args[1] == p for f in facts):
            facts.append(Atom("Publication", (rng.choice(papers), p)))
    fb = FactBase(facts)

    # students co-authoring with a professor TA one of the professor's courses
    for s in studs:
        for p in profs:
            if _coauthors(fb, s, p):
                mine = [(c, q) for c, pp, q in teaching if pp == p]
                if not mine:
                    c, q = rng.choice(courses), rng.choice(quarters)
                    fb.add(Atom("TaughtBy", (c, p, q)))
                    mine = [(c, q)]
                c, q = rng.choice(mine)
                fb.add(Atom("Ta", (c, s, q)))
        if rng.random() < 0.3:
            c, _, q = rng.choice(teaching)
            fb.add(Atom("Ta", (c, s, q)))

    people = profs + studs
    pairs = [(x, y) for x in people for y in people if x != y]
    rng.shuffle(pairs)
    pos = [(s, advisor[s]) for s in studs]
    pos_set = set(pos)
    neg = [p for p in pairs if p not in pos_set]
    chosen = pos + neg[: max(0, n_examples - len(pos))]
    ex = ExampleSet((Atom("AdvisedBy", pair), pair in pos_set) for pair in chosen)
    return fb, ex


def _coauthors(fb: FactBase, x: Term, y: Term) -> bool:
    papers_x = {f.args[0] for f in fb.facts if f.predicate == "Publication" and f.args[1] == x}
    return any(Atom("Publication", (p, y)) in fb for p in papers_x)


UW_TYPES = {
    "Professor": ("person",),
    "Student": ("person",),
    "Publication": ("paper", "person"),
    "YearsInProgram": ("person", "year"),
    "TaughtBy": ("course", "person", "quarter"),
    "Ta": ("course", "person", "quarter"),
}


def uwcse_ensemble(
    rng: random.Random,
    n_trees: int,
    depth: int = 3,
    p_split: float = 0.85,
    feature_skew: float | None = 0.3,
) -> list[TildeTree]:
    """Random boosting-style trees over the typed university vocabulary.

    Candidate tests at a node are all type-correct atoms that reuse at least
    one variable in scope (plus fresh ones). The candidates are ranked by an
    ensemble-wide hash, and a test is picked at a geometric rank with success
    probability ``feature_skew``, so all trees favour the same features the
    way boosted trees do. ``feature_skew=None`` picks uniformly.
    """
    years = [const(f'"year{i}"') for i in range(1, 7)]
    salt = str(rng.random())

    def candidates(scope: list[tuple[Term, str]], fresh: list[Term]) -> list[Atom]:
        in_scope = {v for v, _ in scope}
        out = []
        for name in sorted(UW_TYPES):
            choices = []
            for i, ty in enumerate(UW_TYPES[name]):
                if ty == "year":
                    choices.append(years)
                else:
                    choices.append([v for v, t in scope if t == ty] + [fresh[i]])
            for args in itertools.product(*choices):
                if any(a in in_scope for a in args):
                    out.append(Atom(name, tuple(args)))

        def rank(a: Atom) -> str:
            key = str(a)
            for i, f in enumerate(fresh):
                key = key.replace(f.name, f"_{i}")
            return hashlib.sha1((salt + key).encode()).hexdigest()

        return sorted(out, key=rank)

    def one_tree() -> TildeTree:
        counter = [0]

        def build(level: int, scope: list[tuple[Term, str]], root: bool):
            if level >= depth or (not root and rng.random() > p_split):
                return Leaf(round(rng.uniform(-1.0, 1.0), 3))
            fresh = [var(f"v{counter[0] + i + 1}") for i in range(3)]
            counter[0] += 3
            cands = candidates(scope, fresh)
            if feature_skew is None:
                test = rng.choice(cands)
            else:
                k = 0
                while k < len(cands) - 1 and rng.random() > feature_skew:
                    k += 1
                test = cands[k]
            in_scope = {v for v, _ in scope}
            new = [(t, UW_TYPES[test.predicate][i]) for i, t in enumerate(test.args)
                   if t.is_var and t not in in_scope]
            return Inner((test,), build(level + 1, scope + new, False), build(level + 1, scope, False))

        return TildeTree(ADVISED_BY, build(0, [(v, "person") for v in ADVISED_BY.args], True))

    return [one_tree() for _ in range(n_trees)]


def constants_heavy_ensemble(rng: random.Random, n_trees: int = 12, depth: int = 3) -> list[TildeTree]:
    """Trees testing many distinct constants; almost nothing subsumes anything else.

    Mirrors citation-style data where rules mention specific venues and words.
    """
    target = Atom("CoAuthor", (var("a"), var("b")))
    venues = [const(f"V{i}") for i in range(40)]
    words = [const(f"W{i}") for i in range(40)]

    def node(level: int):
        if level == depth:
            return Leaf(round(rng.uniform(-1, 1), 3))
        who = rng.choice(target.args)
        p = var(f"p{level}")
        kind, pool = rng.choice((("Venue", venues), ("Word", words)))
        tests = (Atom("Wrote", (who, p)), Atom(kind, (p, rng.choice(pool))))
        return Inner(tests, node(level + 1), node(level + 1))

    return [TildeTree(target, node(0)) for _ in range(n_trees)]

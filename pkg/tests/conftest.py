from pathlib import Path

import pytest

from cote.io import parse_model, read_text
from cote.logic import Atom, Clause, const, var
from cote.synthetic import random_ensemble, random_fact_base

FIXTURES = Path(__file__).parent / "fixtures"

HEAD = Atom("T", (var("a"), var("b")))
SMALL_PREDICATES = {"P": 1, "Q": 2, "R": 2}
PEOPLE = [const(f"A{i}") for i in range(5)]
ITEMS = [const(f"B{i}") for i in range(5)]
DOMAIN = PEOPLE + ITEMS


def advising():
    trees, combine = parse_model(read_text(FIXTURES / "advising_model.json"))
    return trees


@pytest.fixture
def advising_trees():
    return advising()


def small_ensemble(rng, n_trees=None, depth=None):
    n_trees = n_trees or rng.randint(2, 4)
    depth = depth or rng.randint(1, 3)
    return random_ensemble(
        rng, HEAD, SMALL_PREDICATES, n_trees, depth, DOMAIN[::3], p_const=0.1, p_conj=0.25
    )


def small_facts(rng, density=None):
    return random_fact_base(rng, SMALL_PREDICATES, DOMAIN, density or rng.uniform(0.05, 0.35))


def random_body(rng, n_atoms, variables=("x", "y", "z"), head=("a", "b"), constants=("C1", "C2")):
    atoms = []
    pool = [var(v) for v in variables] + [var(h) for h in head]
    for _ in range(n_atoms):
        name = rng.choice(sorted(SMALL_PREDICATES))
        args = []
        for _ in range(SMALL_PREDICATES[name]):
            args.append(const(rng.choice(constants)) if rng.random() < 0.15 else rng.choice(pool))
        atoms.append(Atom(name, tuple(args)))
    return atoms


def random_clause(rng, max_atoms=5, value=0.0):
    return Clause(HEAD, tuple(random_body(rng, rng.randint(0, max_atoms))), value)


# -- acceptance summary ----------------------------------------------------------

_acceptance = {}


def pytest_runtest_logreport(report):
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.rsplit("::", 1)[-1]
        if name.startswith("test_ac"):
            _acceptance[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance, key=lambda n: int(n.split("_")[1][2:])):
        terminalreporter.write_line(f"{name}: {'PASS' if _acceptance[name] == 'passed' else 'FAIL'}")

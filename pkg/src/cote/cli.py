"""Command-line driver.

    cote compress --model M.json --mode scote --facts F --out L.txt [--report R]
    cote compress --model M.json --mode ecote --facts F --pos P --neg N --out L.txt
    cote eval --list L.txt --facts F --pos P --neg N [--model M.json]

Exit codes: 0 success, 1 usage error, 2 parse error, 3 time budget exceeded
(a partial report is still written), 4 the output failed its faithfulness
self-check.
"""

from __future__ import annotations

import argparse
import logging
import random
import sys
import time

from .compress import compress, predict
from .coverage import ExampleSet, FactBase
from .errors import CompressionAborted, ParseError
from .io import Signatures, parse_examples, parse_facts, parse_list, parse_model, read_text, write_list, write_text
from .logic import Atom, untag_list
from .metrics import RunReport, auc_pr, auc_roc, compression_stats, sigmoid
from .subsumption import SearchBudget
from .synthetic import ground_instances
from .trees import eval_ensemble

logger = logging.getLogger("cote")

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_BUDGET, EXIT_UNFAITHFUL = 0, 1, 2, 3, 4

FUZZ_INSTANCES = 500


class _Usage(Exception):
    pass


def _read(path: str) -> str:
    try:
        return read_text(path)
    except OSError as exc:
        raise _Usage(f"cannot read {path}: {exc.strerror}") from None


def _load_examples(args, sigs) -> ExampleSet | None:
    if not args.pos and not args.neg:
        return None
    if not (args.pos and args.neg):
        raise _Usage("--pos and --neg must be given together")
    return parse_examples(_read(args.pos), _read(args.neg), sigs, (args.pos, args.neg))


def fuzz_instances(target: Atom, fb: FactBase, n: int, seed: int = 0) -> list[Atom]:
    """Up to ``n`` ground target atoms over the fact base's constants."""
    consts = sorted(fb.constants(), key=lambda t: t.name)
    if not consts:
        return []
    total = len(consts) ** target.arity
    if total <= n:
        return ground_instances(target, consts)
    rng = random.Random(seed)
    seen = set()
    while len(seen) < n:
        seen.add(Atom(target.predicate, tuple(rng.choice(consts) for _ in target.args)))
    return sorted(seen, key=str)


def self_check(trees, combine, dl, fb, instances) -> int:
    """Number of instances where the list and the ensemble disagree."""
    bad = 0
    for g in instances:
        if predict(dl, fb, g) != eval_ensemble(trees, fb, g, combine):
            bad += 1
    return bad


def cmd_compress(args) -> int:
    if args.mode == "ecote" and not (args.pos and args.neg):
        raise _Usage("--mode ecote needs --pos and --neg")
    sigs = Signatures()
    trees, combine = parse_model(_read(args.model), sigs, args.model)
    fb = parse_facts(_read(args.facts), sigs, args.facts)
    examples = _load_examples(args, sigs)
    report_path = args.report or args.out + ".report"

    report = RunReport(mode=args.mode, **compression_stats(trees))
    budget = SearchBudget(args.subsumption_backtracks, args.subsumption_seconds)
    if args.budget_seconds:
        budget = SearchBudget(budget.max_backtracks, min(budget.seconds, args.budget_seconds))
    t0 = time.monotonic()
    try:
        result = compress(
            trees, args.mode, combine, fb, examples, budget,
            seconds=args.budget_seconds, exact=args.exact_clause_subsumption,
            on_iteration=lambda s: logger.info(
                "iteration %d: %d candidate rules, %d kept", s.iteration, s.candidates, s.kept),
        )
    except CompressionAborted as exc:
        report.wall_time = time.monotonic() - t0
        report.status = "aborted"
        report.aborted_phase = exc.phase
        report.extra.update({f"progress_{k}": v for k, v in exc.progress.items()})
        report.budget_aborts = exc.progress.get("aborted_cells", 0)
        write_text(report_path, report.to_text())
        print(f"cote: {exc}; partial report in {report_path}", file=sys.stderr)
        return EXIT_BUDGET
    report.wall_time = time.monotonic() - t0
    dl = untag_list(result.decision_list)
    report.rules_after = len(dl.rules)
    report.avg_body_len = dl.avg_body_length
    report.budget_aborts = result.aborted_cells
    report.extra["groups"] = result.groups
    if result.subsumption_matrix is not None and args.diagnostics:
        result.subsumption_matrix.write_diagnostics(args.diagnostics)

    checked = [e.atom for e in examples] if examples is not None else []
    if args.mode == "scote":
        checked += fuzz_instances(dl.target, fb, args.fuzz, args.seed)
    bad = self_check(trees, combine, dl, fb, checked)
    if bad:
        report.faithfulness = f"violated({bad})"
    else:
        report.faithfulness = "exact" if args.mode == "scote" else "trainExact"
    report.extra["checked_instances"] = len(checked)

    write_text(args.out, write_list(dl, args.mode))
    write_text(report_path, report.to_text())
    print(
        f"{args.mode}: {report.rules_before} naive rules -> {report.rules_after} rules, "
        f"avg body length {report.avg_body_len:.3f}, faithfulness {report.faithfulness}"
    )
    return EXIT_UNFAITHFUL if bad else EXIT_OK


def _metrics_row(name, scores, labels, rules, avg_len):
    return (name, auc_roc(scores, labels), auc_pr(scores, labels), rules, avg_len)


def cmd_eval(args) -> int:
    sigs = Signatures()
    dl = parse_list(_read(args.list), sigs, args.list)
    fb = parse_facts(_read(args.facts), sigs, args.facts)
    examples = _load_examples(args, sigs)
    if examples is None:
        raise _Usage("eval needs --pos and --neg")
    labels = examples.labels
    squash = sigmoid if args.sigmoid else (lambda x: x)

    rows = [_metrics_row("list", [squash(predict(dl, fb, e.atom)) for e in examples], labels,
                         len(dl.rules), dl.avg_body_length)]
    if args.model:
        trees, combine = parse_model(_read(args.model), sigs, args.model)
        scores = [squash(eval_ensemble(trees, fb, e.atom, combine)) for e in examples]
        stats = compression_stats(trees)
        rows.append(_metrics_row("ensemble", scores, labels, stats["rules_before"], float("nan")))

    print(f"{'model':<10}{'AUC-ROC':>10}{'AUC-PR':>10}{'#rules':>14}{'avg_len':>10}")
    for name, roc, pr, n, avg in rows:
        print(f"{name:<10}{roc:>10.3f}{pr:>10.3f}{n:>14}{avg:>10.3f}")
    if args.machine:
        for name, roc, pr, n, avg in rows:
            print(f"{name},{roc!r},{pr!r},{n},{avg!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cote", description="Compress relational tree ensembles into decision lists.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compress", help="compress an ensemble model")
    c.add_argument("--model", required=True)
    c.add_argument("--mode", choices=("scote", "ecote"), required=True)
    c.add_argument("--facts", required=True)
    c.add_argument("--pos")
    c.add_argument("--neg")
    c.add_argument("--out", required=True)
    c.add_argument("--report")
    c.add_argument("--budget-seconds", type=float, default=None, help="wall-clock limit for the whole run")
    c.add_argument("--subsumption-seconds", type=float, default=5.0, help="limit per subsumption test")
    c.add_argument("--subsumption-backtracks", type=int, default=10**6)
    c.add_argument("--exact-clause-subsumption", action="store_true",
                   help="test whole rules by theta-subsumption instead of group matching")
    c.add_argument("--diagnostics", help="CSV dump of subsumption matrix cells (scote)")
    c.add_argument("--fuzz", type=int, default=FUZZ_INSTANCES, help="synthetic instances for the scote self-check")
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_compress)

    e = sub.add_parser("eval", help="evaluate a decision list on labelled examples")
    e.add_argument("--list", required=True)
    e.add_argument("--facts", required=True)
    e.add_argument("--pos")
    e.add_argument("--neg")
    e.add_argument("--model", help="also score the original ensemble")
    e.add_argument("--sigmoid", action="store_true", help="map scores through the logistic function")
    e.add_argument("--machine", action="store_true", help="also print comma-separated rows")
    e.set_defaults(func=cmd_eval)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except _Usage as exc:
        print(f"cote: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"cote: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValueError as exc:
        print(f"cote: invalid input: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())

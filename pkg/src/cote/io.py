"""Readers and writers for models, fact bases, example sets and decision lists.

Surface syntax for terms: an identifier starting with a lowercase letter or
``_`` is a variable; one starting with an uppercase letter or a digit is a
constant, as is a double-quoted string. The symbol in front of ``(`` is a
predicate name whatever its case.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from typing import Sequence

from .coverage import ExampleSet, FactBase
from .errors import ParseError
from .logic import Atom, Clause, DecisionList, Term, const, format_value, var
from .trees import Inner, Leaf, TildeTree

logger = logging.getLogger(__name__)

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<str>"(?:[^"\\\n]|\\.)*")
  | (?P<num>[-+]?[0-9][A-Za-z0-9_.]*(?:[eE][-+]?[0-9]+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<implies>:-)
  | (?P<and>∧|&)
  | (?P<punct>[(),.:%])
  | (?P<bad>.)
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    col: int


def _tokenize(text: str, line: int | None = None, source: str | None = None) -> list[_Tok]:
    out = []
    for m in _TOKEN.finditer(text):
        kind = m.lastgroup
        if kind == "ws":
            continue
        if kind == "punct" and m.group() == "%":
            break
        if kind == "bad":
            ch = m.group()
            hint = "negation is not supported" if ch in "\\~¬" else f"unexpected character {ch!r}"
            raise ParseError(hint, line, m.start() + 1, source)
        out.append(_Tok(kind, m.group(), m.start() + 1))
    return out


class Signatures:
    """Arity table shared by everything parsed in one run."""

    def __init__(self):
        self.arity: dict[str, int] = {}

    def check(self, a: Atom, line=None, col=None, source=None) -> Atom:
        known = self.arity.setdefault(a.predicate, a.arity)
        if known != a.arity:
            raise ParseError(
                f"predicate {a.predicate} used with arity {a.arity}, previously {known}",
                line, col, source,
            )
        return a


class _Parser:
    def __init__(self, text: str, line=None, source=None, sigs: Signatures | None = None):
        self.toks = _tokenize(text, line, source)
        self.pos = 0
        self.line = line
        self.source = source
        self.sigs = sigs
        self.end_col = len(text) + 1

    def error(self, msg, tok: _Tok | None = None):
        col = tok.col if tok else self.end_col
        return ParseError(msg, self.line, col, self.source)

    def peek(self) -> _Tok | None:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self, text: str | None = None, kind: str | None = None) -> _Tok:
        t = self.peek()
        if t is None:
            want = text or kind
            raise self.error(f"unexpected end of input, expected {want}")
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            raise self.error(f"expected {text or kind}, found {t.text!r}", t)
        self.pos += 1
        return t

    def at(self, text: str) -> bool:
        t = self.peek()
        return t is not None and t.text == text

    def done(self) -> bool:
        return self.pos >= len(self.toks)

    def term(self) -> Term:
        t = self.peek()
        if t is None:
            raise self.error("expected a term")
        self.pos += 1
        if t.kind == "str" or t.kind == "num":
            term = const(t.text)
        elif t.kind == "ident":
            term = var(t.text) if (t.text[0].islower() or t.text[0] == "_") else const(t.text)
        else:
            raise self.error(f"expected a term, found {t.text!r}", t)
        if self.at("("):
            raise self.error("function symbols are not supported", self.peek())
        return term

    def atom(self) -> Atom:
        name = self.peek()
        if name is not None and name.kind == "ident" and name.text in ("not", "\\+"):
            raise self.error("negation is not supported", name)
        name = self.take(kind="ident")
        args: list[Term] = []
        if self.at("("):
            self.take("(")
            if not self.at(")"):
                args.append(self.term())
                while self.at(","):
                    self.take(",")
                    args.append(self.term())
            self.take(")")
        a = Atom(name.text, tuple(args))
        if self.sigs is not None:
            self.sigs.check(a, self.line, name.col, self.source)
        return a

    def conjunction(self, stop=(".",)) -> list[Atom]:
        atoms = []
        t = self.peek()
        if t is None or t.text in stop:
            return atoms
        atoms.append(self.atom())
        while True:
            t = self.peek()
            if t is None or t.text in stop:
                return atoms
            if t.text == "," or t.kind == "and":
                self.pos += 1
                atoms.append(self.atom())
            else:
                raise self.error(f"expected ',' or end of body, found {t.text!r}", t)


def parse_atom(text: str, sigs: Signatures | None = None) -> Atom:
    p = _Parser(text, sigs=sigs)
    a = p.atom()
    if not p.done():
        raise p.error(f"trailing input {p.peek().text!r}", p.peek())
    return a


def parse_conjunction(text: str, sigs: Signatures | None = None) -> list[Atom]:
    p = _Parser(text, sigs=sigs)
    atoms = p.conjunction(stop=())
    if not atoms:
        raise p.error("empty conjunction")
    return atoms


# -- ground atom files ---------------------------------------------------------


def _ground_lines(text: str, source: str | None, sigs: Signatures):
    for lineno, raw in enumerate(text.splitlines(), 1):
        p = _Parser(raw, lineno, source, sigs)
        if p.done():
            continue
        a = p.atom()
        if p.at("."):
            p.take(".")
        if not p.done():
            raise p.error(f"trailing input {p.peek().text!r}", p.peek())
        for t in a.args:
            if t.is_var:
                raise ParseError(f"fact {a} contains variable {t}", lineno, None, source)
        yield lineno, a


def parse_facts(text: str, sigs: Signatures | None = None, source: str | None = None) -> FactBase:
    sigs = sigs if sigs is not None else Signatures()
    return FactBase(a for _, a in _ground_lines(text, source, sigs))


def parse_examples(
    pos_text: str,
    neg_text: str,
    sigs: Signatures | None = None,
    sources: tuple[str | None, str | None] = (None, None),
) -> ExampleSet:
    """Positive examples first, then negatives, each in file order."""
    sigs = sigs if sigs is not None else Signatures()
    labels: dict[Atom, bool] = {}
    target = None
    for text, positive, source in ((pos_text, True, sources[0]), (neg_text, False, sources[1])):
        for lineno, a in _ground_lines(text, source, sigs):
            if target is None:
                target = a.predicate
            elif a.predicate != target:
                raise ParseError(f"example {a} does not use target predicate {target}", lineno, None, source)
            if a in labels:
                if labels[a] != positive:
                    raise ParseError(f"example {a} is both positive and negative", lineno, None, source)
                logger.warning("%s:%s: duplicate example %s ignored", source or "<input>", lineno, a)
                continue
            labels[a] = positive
    return ExampleSet(labels.items())


def format_facts(fb: FactBase) -> str:
    return "".join(f"{a}.\n" for a in sorted(fb.facts, key=str))


def format_examples(ex: ExampleSet) -> tuple[str, str]:
    pos = "".join(f"{e.atom}.\n" for e in ex if e.positive)
    neg = "".join(f"{e.atom}.\n" for e in ex if not e.positive)
    return pos, neg


# -- model files ----------------------------------------------------------------


def _parse_node(obj, path: str, sigs: Signatures, source) -> Inner | Leaf:
    if not isinstance(obj, dict):
        raise ParseError(f"{path}: expected an object", None, None, source)
    if "leaf" in obj:
        extra = set(obj) - {"leaf"}
        if extra:
            raise ParseError(f"{path}: unexpected keys {sorted(extra)} in leaf", None, None, source)
        v = obj["leaf"]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ParseError(f"{path}: leaf value must be a number", None, None, source)
        try:
            return Leaf(float(v))
        except ValueError as exc:
            raise ParseError(f"{path}: {exc}", None, None, source) from None
    missing = {"test", "yes", "no"} - set(obj)
    if missing:
        raise ParseError(f"{path}: node is missing {sorted(missing)}", None, None, source)
    extra = set(obj) - {"test", "yes", "no"}
    if extra:
        raise ParseError(f"{path}: unexpected keys {sorted(extra)}", None, None, source)
    test = obj["test"]
    if isinstance(test, str):
        test = [test]
    if not isinstance(test, list) or not test or not all(isinstance(t, str) for t in test):
        raise ParseError(f"{path}.test: expected a non-empty list of atoms", None, None, source)
    atoms: list[Atom] = []
    for i, t in enumerate(test):
        try:
            atoms.extend(parse_conjunction(t, sigs))
        except ParseError as exc:
            raise ParseError(f"{path}.test[{i}]: {exc}", None, None, source) from None
    return Inner(
        tuple(atoms),
        _parse_node(obj["yes"], path + ".yes", sigs, source),
        _parse_node(obj["no"], path + ".no", sigs, source),
    )


def parse_model(
    text: str, sigs: Signatures | None = None, source: str | None = None
) -> tuple[list[TildeTree], str]:
    """Parse a JSON model document into trees and the combine mode.

    Layout::

        {"target": "AdvisedBy(a,b)", "combine": "sum",
         "trees": [{"test": ["Professor(b)"], "yes": {"leaf": 0.7}, "no": {"leaf": -0.2}}]}
    """
    sigs = sigs if sigs is not None else Signatures()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno, source) from None
    if not isinstance(doc, dict):
        raise ParseError("model must be a JSON object", 1, 1, source)
    for key in ("target", "trees"):
        if key not in doc:
            raise ParseError(f"model is missing {key!r}", None, None, source)
    combine = doc.get("combine", "sum")
    if combine not in ("sum", "average"):
        raise ParseError(f"unknown combine mode {combine!r}", None, None, source)
    try:
        target = parse_atom(doc["target"], sigs)
    except ParseError as exc:
        raise ParseError(f"target: {exc}", None, None, source) from None
    except TypeError:
        raise ParseError("target must be a string", None, None, source) from None
    seen = set()
    for t in target.args:
        if not t.is_var or t in seen:
            raise ParseError(f"target {target} must have distinct variable arguments", None, None, source)
        seen.add(t)
    trees_doc = doc["trees"]
    if not isinstance(trees_doc, list) or not trees_doc:
        raise ParseError("model must contain at least one tree", None, None, source)
    trees = [TildeTree(target, _parse_node(t, f"trees[{i}]", sigs, source)) for i, t in enumerate(trees_doc)]
    return trees, combine


def _node_doc(node) -> dict:
    if isinstance(node, Leaf):
        return {"leaf": node.value}
    return {"test": [str(a) for a in node.tests], "yes": _node_doc(node.yes), "no": _node_doc(node.no)}


def format_model(trees: Sequence[TildeTree], combine: str = "sum") -> str:
    if not trees:
        raise ValueError("a model needs at least one tree")
    doc = {"target": str(trees[0].target), "combine": combine, "trees": [_node_doc(t.root) for t in trees]}
    return json.dumps(doc, indent=1, ensure_ascii=False) + "\n"


# -- decision lists ---------------------------------------------------------------


def _provenance_comment(prov) -> str:
    return " ".join(f"t{t}:{leaf}" for t, leaf in prov)


_PROV = re.compile(r"^t(\d+):(\d+)$")
_HEADER = re.compile(r"^%\s*([A-Za-z_]+)\s*=\s*(\S+)\s*$")


def write_list(dl: DecisionList, mode: str | None = None) -> str:
    """One rule per line: ``<value>: <Head> :- <atom>, ..., <atom>.``.

    Values are the stored ones; in average mode readers divide by ``trees``.
    A trailing comment records the source leaf of every tree.
    """
    lines = ["% cote decision list"]
    if mode:
        lines.append(f"% mode={mode}")
    lines += [
        f"% combine={dl.combine}",
        f"% trees={dl.tree_count}",
        f"% rules={len(dl.rules)}",
        f"% avg_body_length={format_value(dl.avg_body_length)}",
    ]
    for r in dl.rules:
        body = ", ".join(str(a) for a in r.body)
        line = f"{format_value(r.value)}: {r.head} :- {body}." if body else f"{format_value(r.value)}: {r.head} :- ."
        if r.provenance:
            line += f"  % {_provenance_comment(r.provenance)}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def read_list_header(text: str) -> dict[str, str]:
    out = {}
    for raw in text.splitlines():
        m = _HEADER.match(raw.strip())
        if m:
            out[m.group(1)] = m.group(2)
    return out


def parse_list(text: str, sigs: Signatures | None = None, source: str | None = None) -> DecisionList:
    header = read_list_header(text)
    combine = header.get("combine", "sum")
    try:
        trees = int(header.get("trees", "1"))
    except ValueError:
        raise ParseError(f"bad trees header {header['trees']!r}", None, None, source) from None
    rules: list[Clause] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        p = _Parser(raw, lineno, source, sigs)
        if p.done():
            continue
        tok = p.take(kind="num") if p.peek().kind == "num" else None
        if tok is None:
            raise p.error("rule line must start with a numeric value", p.peek())
        try:
            value = float(tok.text)
        except ValueError:
            raise p.error(f"bad value {tok.text!r}", tok) from None
        p.take(":")
        head = p.atom()
        p.take(kind="implies")
        body = p.conjunction()
        p.take(".")
        if not p.done():
            raise p.error(f"trailing input {p.peek().text!r}", p.peek())
        prov = []
        if "%" in raw:
            for part in raw.split("%", 1)[1].split():
                m = _PROV.match(part)
                if m:
                    prov.append((int(m.group(1)), int(m.group(2))))
        try:
            rules.append(Clause(head, tuple(body), value, tuple(prov)))
        except ValueError as exc:
            raise ParseError(str(exc), lineno, None, source) from None
    if not rules:
        raise ParseError("decision list has no rules", None, None, source)
    try:
        return DecisionList(rules[0].head, tuple(rules), combine, trees)
    except ValueError as exc:
        raise ParseError(str(exc), None, None, source) from None


def read_text(path) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)

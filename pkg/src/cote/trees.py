"""Relational (TILDE-style) regression trees and their reference evaluation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence, Union

from .coverage import FactBase, head_binding, satisfies
from .logic import Atom, Clause, DecisionList


@dataclass(frozen=True)
class Leaf:
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"leaf value {self.value} is not finite")


@dataclass(frozen=True)
class Inner:
    """Test node. ``tests`` is a conjunction checked in the context of the path."""

    tests: tuple[Atom, ...]
    yes: Node
    no: Node

    def __post_init__(self):
        if not self.tests:
            raise ValueError("an inner node needs at least one test atom")


Node = Union[Inner, Leaf]


@dataclass(frozen=True)
class TildeTree:
    target: Atom
    root: Node

    def leaves(self) -> list[Leaf]:
        """Leaves in lexicographic order (yes branch before no branch)."""
        return [leaf for _, leaf in self.paths()]

    def paths(self) -> Iterator[tuple[list[Atom], Leaf]]:
        """Yield ``(positive path atoms, leaf)`` in lexicographic order."""
        stack: list[tuple[Node, list[Atom]]] = [(self.root, [])]
        while stack:
            node, path = stack.pop()
            if isinstance(node, Leaf):
                yield path, node
            else:
                stack.append((node.no, path))
                stack.append((node.yes, path + list(node.tests)))

    @property
    def n_leaves(self) -> int:
        return sum(1 for _ in self.paths())

    @property
    def depth(self) -> int:
        def d(node):
            if isinstance(node, Leaf):
                return 0
            return 1 + max(d(node.yes), d(node.no))

        return d(self.root)

    def atoms(self) -> Iterator[Atom]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Inner):
                yield from node.tests
                stack.extend((node.yes, node.no))


def tree_to_list(tree: TildeTree, tree_index: int = 0) -> DecisionList:
    """One rule per leaf; bodies keep only the atoms of yes-edges."""
    rules = tuple(
        Clause(tree.target, tuple(path), leaf.value, ((tree_index, i),))
        for i, (path, leaf) in enumerate(tree.paths())
    )
    return DecisionList(tree.target, rules)


def eval_tree(tree: TildeTree, fb: FactBase, binding) -> float:
    node = tree.root
    context: list[Atom] = []
    while isinstance(node, Inner):
        query = context + list(node.tests)
        if satisfies(fb, binding, query):
            context = query
            node = node.yes
        else:
            node = node.no
    return node.value


def eval_ensemble(trees: Sequence[TildeTree], fb: FactBase, ground: Atom, mode: str = "sum") -> float:
    """Combined ensemble prediction for one ground target atom.

    Tree values are added left to right, which is also the order in which
    merged rule values are accumulated.
    """
    if not trees:
        raise ValueError("empty ensemble")
    binding = head_binding(trees[0].target, ground)
    total = eval_tree(trees[0], fb, binding)
    for t in trees[1:]:
        total = total + eval_tree(t, fb, head_binding(t.target, ground))
    if mode == "average":
        return total / len(trees)
    if mode != "sum":
        raise ValueError(f"unknown combine mode {mode!r}")
    return total

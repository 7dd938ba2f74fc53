"""Ranking metrics and compression statistics."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

from .logic import DecisionList
from .trees import TildeTree


def _check(scores, labels):
    if len(scores) != len(labels):
        raise ValueError("scores and labels differ in length")
    n_pos = sum(1 for y in labels if y)
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs at least one positive and one negative example")
    return n_pos, n_neg


def auc_roc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Mann-Whitney estimate of the ROC area; tied pairs count one half."""
    n_pos, n_neg = _check(scores, labels)
    order = sorted(range(len(scores)), key=lambda i: scores[i])
    rank_sum = 0.0
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and scores[order[j + 1]] == scores[order[i]]:
            j += 1
        avg_rank = (i + j) / 2 + 1
        rank_sum += avg_rank * sum(1 for k in order[i : j + 1] if labels[k])
        i = j + 1
    return (rank_sum - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg)


def auc_pr(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Area under the precision-recall step curve (average precision).

    Tied scores form one threshold, so the result does not depend on input order.
    """
    n_pos, _ = _check(scores, labels)
    order = sorted(range(len(scores)), key=lambda i: -scores[i])
    tp = fp = 0
    area = 0.0
    prev_recall = 0.0
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and scores[order[j + 1]] == scores[order[i]]:
            j += 1
        for k in order[i : j + 1]:
            if labels[k]:
                tp += 1
            else:
                fp += 1
        recall = tp / n_pos
        area += (recall - prev_recall) * (tp / (tp + fp))
        prev_recall = recall
        i = j + 1
    return area


def sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


@dataclass
class RunReport:
    mode: str
    rules_before: int = 0
    rules_after: int = 0
    avg_body_len: float = 0.0
    paths_total: int = 0
    max_depth: int = 0
    trees: int = 0
    wall_time: float = 0.0
    budget_aborts: int = 0
    faithfulness: str = "unchecked"
    status: str = "ok"
    aborted_phase: str = ""
    extra: dict = field(default_factory=dict)

    def to_text(self) -> str:
        d = asdict(self)
        extra = d.pop("extra")
        lines = []
        for k, v in list(d.items()) + sorted(extra.items()):
            if isinstance(v, float):
                v = f"{v:.6g}"
            lines.append(f"{k}={v}")
        return "\n".join(lines) + "\n"


def naive_rule_count(trees: Sequence[TildeTree]) -> int:
    """Rules in the full cross product of all tree paths (exact integer)."""
    out = 1
    for t in trees:
        out *= t.n_leaves
    return out


def compression_stats(trees: Sequence[TildeTree], output: DecisionList | None = None) -> dict:
    stats = {
        "rules_before": naive_rule_count(trees),
        "paths_total": sum(t.n_leaves for t in trees),
        "max_depth": max((t.depth for t in trees), default=0),
        "trees": len(trees),
    }
    if output is not None:
        stats["rules_after"] = len(output.rules)
        stats["avg_body_len"] = output.avg_body_length
    return stats

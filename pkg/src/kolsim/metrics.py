"""Top-k ranking metrics against a gold promoter set (binary relevance)."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import EmptyGold


@dataclass
class EvalReport:
    per_k: dict = field(default_factory=dict)   # k -> {"precision","recall","ndcg"}
    gold_size: int = 0

    def to_json_dict(self):
        return {
            "per_k": {str(k): dict(v) for k, v in sorted(self.per_k.items())},
            "gold_size": self.gold_size,
        }

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def precision_recall_at_k(ranking, gold, k):
    """(hits/k, hits/|gold|) over the top-k of the ranking."""
    if k < 1:
        raise ValueError("k must be >= 1")
    gold = set(gold)
    if not gold:
        raise EmptyGold("gold set is empty")
    hits = sum(1 for uid in ranking[:k] if uid in gold)
    return hits / k, hits / len(gold)


def ndcg_at_k(ranking, gold, k):
    """Binary-relevance NDCG with the 1/log2(rank+1) discount."""
    if k < 1:
        raise ValueError("k must be >= 1")
    gold = set(gold)
    if not gold:
        raise EmptyGold("gold set is empty")
    dcg = sum(
        1.0 / math.log2(i + 1)
        for i, uid in enumerate(ranking[:k], start=1)
        if uid in gold
    )
    ideal = sum(1.0 / math.log2(i + 1) for i in range(1, min(k, len(gold)) + 1))
    return dcg / ideal if ideal > 0 else 0.0


def evaluate_ranking(ranking, gold, ks=(5, 10)):
    """EvalReport with precision/recall/NDCG at each requested k."""
    gold = set(gold)
    if not gold:
        raise EmptyGold("gold set is empty")
    report = EvalReport(gold_size=len(gold))
    for k in ks:
        p, r = precision_recall_at_k(ranking, gold, k)
        report.per_k[k] = {
            "precision": p,
            "recall": r,
            "ndcg": ndcg_at_k(ranking, gold, k),
        }
    return report


def format_report_table(report, label="ranking"):
    """Two-decimal text table, one row per ranking."""
    ks = sorted(report.per_k)
    header = ["model"] + [f"P@{k}" for k in ks] + [f"R@{k}" for k in ks] + [f"G@{k}" for k in ks]
    row = [label]
    row += [f"{report.per_k[k]['precision']:.2f}" for k in ks]
    row += [f"{report.per_k[k]['recall']:.2f}" for k in ks]
    row += [f"{report.per_k[k]['ndcg']:.2f}" for k in ks]
    widths = [max(len(h), len(r)) for h, r in zip(header, row)]
    line1 = "  ".join(h.ljust(w) for h, w in zip(header, widths))
    line2 = "  ".join(r.ljust(w) for r, w in zip(row, widths))
    return line1 + "\n" + line2

"""Top-k ranking metrics.

Average precision uses the min(k, |relevant|) denominator, so AP@1 equals
precision@1 whenever at least one item is relevant. Degenerate empty
relevant sets (unreachable in generated data, where EOP guarantees a
positive) are pinned: precision 0, recall 1 (with a warning), AP 0.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence


def _check(ranking: Sequence[str], k: int) -> list[str]:
    if k < 1:
        raise ValueError("k must be >= 1")
    ranking = list(ranking)
    if len(set(ranking)) != len(ranking):
        raise ValueError("ranking contains duplicates")
    return ranking


def precision_at_k(ranking: Sequence[str], relevant: Iterable[str], k: int) -> float:
    ranking = _check(ranking, k)
    relevant = set(relevant)
    if not relevant:
        return 0.0
    hits = sum(1 for item in ranking[:k] if item in relevant)
    return hits / k


def recall_at_k(ranking: Sequence[str], relevant: Iterable[str], k: int) -> float:
    ranking = _check(ranking, k)
    relevant = set(relevant)
    if not relevant:
        warnings.warn("recall@k of an empty relevant set is defined as 1")
        return 1.0
    hits = sum(1 for item in ranking[:k] if item in relevant)
    return hits / len(relevant)


def average_precision_at_k(ranking: Sequence[str], relevant: Iterable[str], k: int) -> float:
    ranking = _check(ranking, k)
    relevant = set(relevant)
    if not relevant:
        return 0.0
    total = 0.0
    hits = 0
    for i, item in enumerate(ranking[:k], start=1):
        if item in relevant:
            hits += 1
            total += hits / i
    return total / min(k, len(relevant))


@dataclass(frozen=True)
class MetricRow:
    dataset: str
    model: str
    k: int
    precision: float
    recall: float
    map: float
    fold: str  # "0".."4" or "mean"

    def as_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "model": self.model,
            "k": self.k,
            "precision": self.precision,
            "recall": self.recall,
            "map": self.map,
            "fold": self.fold,
        }

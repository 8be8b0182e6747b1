"""Ridit scoring of ordinal confidence ratings, per annotator."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping


@dataclass(frozen=True)
class RiditTable:
    """``weights[annotator][level]`` in (0, 1)."""

    weights: dict[Hashable, dict[int, float]] = field(default_factory=dict)

    def weight(self, annotator: Hashable, level: int) -> float:
        try:
            return self.weights[annotator][level]
        except KeyError:
            raise KeyError(f"annotator {annotator!r} never used confidence level {level}") from None

    def __contains__(self, annotator) -> bool:
        return annotator in self.weights


def ridit_score(responses: Mapping[Hashable, Iterable[int]]) -> RiditTable:
    """Map each annotator's levels to ``P(Y < y) + 0.5 * P(Y = y)``.

    Probabilities come from that annotator's own empirical distribution,
    so a level used by every response maps to 0.5 and the top level used
    stays strictly below 1.
    """
    table = {}
    for annotator, levels in responses.items():
        counts = Counter(levels)
        n = sum(counts.values())
        if n == 0:
            raise ValueError(f"annotator {annotator!r} has no responses")
        below = 0
        weights = {}
        for level in sorted(counts):
            weights[level] = (below + 0.5 * counts[level]) / n
            below += counts[level]
        table[annotator] = weights
    return RiditTable(table)

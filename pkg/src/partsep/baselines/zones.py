"""Zone baseline: assign each note to a part by fixed pitch ranges.

A ZoneSet carves [0, 128) into K contiguous zones with K-1 boundary
pitches; zone j covers [b_{j-1}, b_j) and `part_order[j]` says which part
owns it.  Fitting maximizes training-set note accuracy over all boundary
placements.  The search runs as a dynamic program over (zone, boundary)
rather than enumerating the C(127, K-1) boundary tuples directly; both
walk the same candidate set and the DP reconstruction returns the
lexicographically smallest maximizer, so ties break toward lower
boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Iterable, Sequence

import numpy as np

from ..core import Mixture, Prediction

_NEG = -(1 << 60)


@dataclass(frozen=True)
class ZoneSet:
    """K-1 ascending boundary pitches plus the zone -> part assignment."""

    boundaries: tuple[int, ...]
    part_order: tuple[int, ...]

    def __post_init__(self):
        b = self.boundaries
        if len(b) + 1 != len(self.part_order):
            raise ValueError("need exactly K-1 boundaries for K parts")
        if any(not 1 <= x <= 127 for x in b):
            raise ValueError(f"boundaries must lie in [1, 127]: {b}")
        if any(b[i] >= b[i + 1] for i in range(len(b) - 1)):
            raise ValueError(f"boundaries must be strictly ascending: {b}")
        if sorted(self.part_order) != list(range(len(self.part_order))):
            raise ValueError(f"part_order is not a permutation: {self.part_order}")

    @property
    def k(self) -> int:
        return len(self.part_order)

    def zone_of(self, pitches):
        """Zone index per pitch: the count of boundaries <= pitch."""
        return np.searchsorted(np.asarray(self.boundaries), pitches, side="right")

    def predict(self, mixture: Mixture) -> Prediction:
        if mixture.K != self.k:
            raise ValueError(f"mixture has K={mixture.K}, zones have K={self.k}")
        order = np.asarray(self.part_order)
        labels = order[self.zone_of(mixture.pitches())]
        return Prediction(labels=tuple(int(y) for y in labels))

    def to_text(self) -> str:
        return (f"boundaries={','.join(map(str, self.boundaries))}\n"
                f"part_order={','.join(map(str, self.part_order))}\n")

    @classmethod
    def from_text(cls, text: str) -> "ZoneSet":
        fields = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            fields[key] = tuple(int(v) for v in value.split(",") if v != "")
        return cls(boundaries=fields.get("boundaries", ()),
                   part_order=fields["part_order"])


def _count_matrix(mixtures: Sequence[Mixture]) -> np.ndarray:
    """(K, 128) note counts per (part, pitch) over the whole training set."""
    if not mixtures:
        raise ValueError("cannot fit zones on an empty training set")
    k = mixtures[0].K
    counts = np.zeros((k, 128), dtype=np.int64)
    for m in mixtures:
        if m.K != k:
            raise ValueError(f"inconsistent K: {m.K} vs {k}")
        np.add.at(counts, (m.label_array(), m.pitches()), 1)
    return counts


def _solve(counts: np.ndarray, order: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Optimal boundaries for one fixed zone->part assignment.

    Returns (correct-note count, boundaries).  g[z][b] is the best score
    achievable covering pitches [b, 128) with zones z..K-1; boundaries are
    read back greedily from the left, taking the smallest value that still
    attains the optimum, which yields the lexicographically smallest
    maximizer.
    """
    k = len(order)
    prefix = np.zeros((k, 129), dtype=np.int64)
    prefix[:, 1:] = np.cumsum(counts[np.asarray(order)], axis=1)

    g = np.full((k + 1, 129), _NEG, dtype=np.int64)
    g[k, 128] = 0
    for z in range(k - 1, -1, -1):
        h = prefix[z] + g[z + 1]
        # best h over strictly later boundary positions
        suffix = np.maximum.accumulate(h[::-1])[::-1]
        g[z, :-1] = suffix[1:] - prefix[z, :-1]

    boundaries = []
    pos = 0
    for z in range(k - 1):
        target = g[z, pos] + prefix[z, pos]
        for b in range(pos + 1, 129):
            if prefix[z, b] + g[z + 1, b] == target:
                boundaries.append(b)
                pos = b
                break
    return int(g[0, 0]), tuple(boundaries)


def _mean_pitch_order(counts: np.ndarray) -> tuple[int, ...]:
    totals = np.maximum(counts.sum(axis=1), 1)
    means = counts @ np.arange(128, dtype=np.float64) / totals
    return tuple(int(i) for i in np.argsort(means, kind="stable"))


def fit_zones(mixtures: Iterable[Mixture],
              search_permutations: bool = False) -> ZoneSet:
    """Fit the accuracy-maximizing ZoneSet on a training set.

    By default the zone order is pinned to ascending mean pitch (lowest
    part gets the lowest zone).  With `search_permutations` every zone->part
    assignment is tried as well — only sensible for small K; the pinned
    order wins ties, then earlier permutations in sorted order.
    """
    counts = _count_matrix(list(mixtures))
    k = counts.shape[0]
    pinned = _mean_pitch_order(counts)
    candidates = [pinned]
    if search_permutations:
        candidates += [p for p in sorted(permutations(range(k))) if p != pinned]

    best = None
    for order in candidates:
        score, bounds = _solve(counts, order)
        if best is None or score > best[0]:
            best = (score, bounds, tuple(order))
    return ZoneSet(boundaries=best[1], part_order=best[2])


def oracle_zones(mixture: Mixture) -> ZoneSet:
    """Best-case zones fit on the evaluated sample itself.

    Permutations are searched for small K so the oracle's candidate set
    always contains whatever assignment a globally fit ZoneSet would make,
    keeping oracle accuracy >= global-zone accuracy sample by sample.
    """
    return fit_zones([mixture], search_permutations=mixture.K <= 5)

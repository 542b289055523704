"""Pareto dominance, non-dominated sorting and crowding distance for two objectives."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

INF = math.inf


@dataclass(frozen=True)
class Objectives:
    f1: float
    f2: float
    valid: bool = True

    def pair(self) -> tuple[float, float]:
        return (self.f1, self.f2) if self.valid else (INF, INF)

    def __str__(self) -> str:
        return f"({self.f1:g}, {self.f2:.6g})" if self.valid else "(inf, inf)"


INVALID = Objectives(INF, INF, False)


def dominates(a: Objectives, b: Objectives) -> bool:
    if not a.valid:
        return False
    if not b.valid:
        return True
    return a.f1 <= b.f1 and a.f2 <= b.f2 and (a.f1 < b.f1 or a.f2 < b.f2)


def fast_nondominated_sort(pop: Sequence[Objectives]) -> list[list[int]]:
    """Deb's fast non-dominated sort; returns fronts as lists of indices."""
    n = len(pop)
    dominated_by = [[] for _ in range(n)]  # S_p
    counts = [0] * n  # n_p
    fronts: list[list[int]] = [[]]
    for p in range(n):
        for q in range(n):
            if p == q:
                continue
            if dominates(pop[p], pop[q]):
                dominated_by[p].append(q)
            elif dominates(pop[q], pop[p]):
                counts[p] += 1
        if counts[p] == 0:
            fronts[0].append(p)
    i = 0
    while fronts[i]:
        nxt = []
        for p in fronts[i]:
            for q in dominated_by[p]:
                counts[q] -= 1
                if counts[q] == 0:
                    nxt.append(q)
        i += 1
        fronts.append(sorted(nxt))
    fronts.pop()
    return fronts


def crowding_distance(front: Sequence[Objectives]) -> list[float]:
    n = len(front)
    if n <= 2:
        return [INF] * n
    dist = [0.0] * n
    pairs = [o.pair() for o in front]
    for k in range(2):
        order = sorted(range(n), key=lambda i: pairs[i][k])
        lo, hi = pairs[order[0]][k], pairs[order[-1]][k]
        dist[order[0]] = dist[order[-1]] = INF
        span = hi - lo
        if span == 0 or math.isinf(span):
            continue
        for pos in range(1, n - 1):
            i = order[pos]
            if not math.isinf(dist[i]):
                dist[i] += (pairs[order[pos + 1]][k] - pairs[order[pos - 1]][k]) / span
    return dist


def rank_and_crowd(pop: Sequence[Objectives]) -> tuple[list[int], list[float], list[list[int]]]:
    """Front number and crowding distance of every member."""
    fronts = fast_nondominated_sort(pop)
    rank = [0] * len(pop)
    crowd = [0.0] * len(pop)
    for r, front in enumerate(fronts):
        dists = crowding_distance([pop[i] for i in front])
        for i, d in zip(front, dists):
            rank[i] = r
            crowd[i] = d
    return rank, crowd, fronts


def environmental_selection(pop: Sequence[Objectives], size: int) -> list[int]:
    """Indices of the ``size`` best members by (front, crowding distance)."""
    _, crowd, fronts = rank_and_crowd(pop)
    chosen: list[int] = []
    for front in fronts:
        if len(chosen) + len(front) <= size:
            chosen.extend(front)
            continue
        rest = sorted(front, key=lambda i: -crowd[i])  # stable: ties keep index order
        chosen.extend(rest[: size - len(chosen)])
        break
    return chosen

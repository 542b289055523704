"""Initialization, crossover and mutation on the (b, u, v) genome."""

from __future__ import annotations

import random
from typing import Sequence

from ..genome import Patch
from ..ingredients import ModificationPoint


def random_patch(points: Sequence[ModificationPoint], mu: float, rng: random.Random) -> Patch:
    b, u, v = [], [], []
    for pt in points:
        b.append(1 if rng.random() < pt.susp * mu else 0)
        u.append(rng.randint(1, len(pt.ops)))
        # an empty ingredient list leaves the v gene inert
        v.append(rng.randint(1, len(pt.ingredients)) if pt.ingredients else 0)
    return Patch(tuple(b), tuple(u), tuple(v))


def init_population(size: int, points: Sequence[ModificationPoint], mu: float,
                    rng: random.Random) -> list[Patch]:
    return [random_patch(points, mu, rng) for _ in range(size)]


def hux(b1: Sequence[int], b2: Sequence[int], rng: random.Random) -> tuple[tuple, tuple]:
    """Half-uniform crossover: swap exactly half (rounded down) of the differing bits."""
    diff = [j for j in range(len(b1)) if b1[j] != b2[j]]
    swap = set(rng.sample(diff, len(diff) // 2))
    c1 = tuple(b2[j] if j in swap else b1[j] for j in range(len(b1)))
    c2 = tuple(b1[j] if j in swap else b2[j] for j in range(len(b1)))
    return c1, c2


def single_point(a: Sequence[int], b: Sequence[int], rng: random.Random) -> tuple[tuple, tuple]:
    n = len(a)
    if n < 2:
        return tuple(a), tuple(b)
    cut = rng.randint(1, n - 1)
    return tuple(a[:cut]) + tuple(b[cut:]), tuple(b[:cut]) + tuple(a[cut:])


def clamp(x: Patch, points: Sequence[ModificationPoint], rng: random.Random) -> Patch:
    """Redraw any out-of-range gene; a no-op while parents respect their bounds."""
    u = list(x.u)
    v = list(x.v)
    changed = False
    for j, pt in enumerate(points):
        if not 1 <= u[j] <= len(pt.ops):
            u[j] = rng.randint(1, len(pt.ops))
            changed = True
        if pt.ingredients and not 1 <= v[j] <= len(pt.ingredients):
            v[j] = rng.randint(1, len(pt.ingredients))
            changed = True
    return Patch(x.b, tuple(u), tuple(v)) if changed else x


def crossover(p1: Patch, p2: Patch, points: Sequence[ModificationPoint],
              rng: random.Random) -> tuple[Patch, Patch]:
    b1, b2 = hux(p1.b, p2.b, rng)
    u1, u2 = single_point(p1.u, p2.u, rng)
    v1, v2 = single_point(p1.v, p2.v, rng)
    return clamp(Patch(b1, u1, v1), points, rng), clamp(Patch(b2, u2, v2), points, rng)


def mutate(x: Patch, points: Sequence[ModificationPoint], p_m: float, rng: random.Random) -> Patch:
    b = list(x.b)
    u = list(x.u)
    v = list(x.v)
    for j, pt in enumerate(points):
        if rng.random() < p_m:
            b[j] = 1 - b[j]
        if rng.random() < p_m:
            u[j] = rng.randint(1, len(pt.ops))
        if pt.ingredients and rng.random() < p_m:
            v[j] = rng.randint(1, len(pt.ingredients))
    return Patch(tuple(b), tuple(u), tuple(v))

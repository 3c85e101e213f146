"""Shared generators and reference implementations used as test oracles."""

from __future__ import annotations

import math
from itertools import combinations, permutations

import numpy as np

from pifs.diagram import PersistenceDiagram
from pifs.stepfn import EMPTY, StepFunction


def random_step_function(
    rng: np.random.Generator,
    max_pieces: int = 8,
    integer_values: bool = False,
    allow_empty: bool = True,
) -> StepFunction:
    m = int(rng.integers(0 if allow_empty else 1, max_pieces + 1))
    if m == 0:
        return EMPTY
    start = float(rng.uniform(-10, 10))
    widths = rng.uniform(0.05, 3.0, size=m)
    breakpoints = start + np.concatenate([[0.0], np.cumsum(widths)])
    if integer_values:
        values = rng.integers(-4, 5, size=m).astype(float)
    else:
        values = rng.uniform(-5, 5, size=m)
        values[rng.random(m) < 0.2] = 0.0
    return StepFunction(breakpoints, values)


def random_diagram(
    rng: np.random.Generator,
    max_pairs: int = 12,
    dimension: int = 0,
    with_duplicates: bool = True,
    with_zero_persistence: bool = True,
) -> PersistenceDiagram:
    n = int(rng.integers(0, max_pairs + 1))
    pairs = []
    for _ in range(n):
        b = float(rng.uniform(0, 5))
        d = b + float(rng.uniform(0, 3))
        pairs.append((b, d))
    if with_zero_persistence and n and rng.random() < 0.5:
        b = float(rng.uniform(0, 5))
        pairs.append((b, b))
    if with_duplicates and pairs and rng.random() < 0.5:
        pairs.append(pairs[int(rng.integers(0, len(pairs)))])
    return PersistenceDiagram(dimension, tuple(pairs))


def eval_by_scan(f: StepFunction, x: float) -> float:
    """Linear-scan reference for right-continuous evaluation."""
    for a, b, v in zip(f.breakpoints, f.breakpoints[1:], f.values):
        if a <= x < b:
            return v
    return 0.0


def riemann_integral(f: StepFunction, step: float = 1e-4) -> float:
    if f.is_empty:
        return 0.0
    lo, hi = f.breakpoints[0], f.breakpoints[-1]
    xs = np.arange(lo, hi, step)
    return float(f.sample_values(xs).sum() * step)


def chebyshev(p, q) -> float:
    return max(abs(p[0] - q[0]), abs(p[1] - q[1]))


def wasserstein_by_enumeration(d1: PersistenceDiagram, d2: PersistenceDiagram, p: float) -> float:
    """Exhaustive search over all partial matchings (sizes <= 6 total)."""
    pts1 = [(q.birth, q.death) for q in d1]
    pts2 = [(q.birth, q.death) for q in d2]
    m, n = len(pts1), len(pts2)
    best = math.inf
    for k in range(min(m, n) + 1):
        for chosen1 in combinations(range(m), k):
            for chosen2 in permutations(range(n), k):
                cost = 0.0
                for i, j in zip(chosen1, chosen2):
                    cost += chebyshev(pts1[i], pts2[j]) ** p
                for i in set(range(m)) - set(chosen1):
                    cost += ((pts1[i][1] - pts1[i][0]) / 2.0) ** p
                for j in set(range(n)) - set(chosen2):
                    cost += ((pts2[j][1] - pts2[j][0]) / 2.0) ** p
                best = min(best, cost)
    return best ** (1.0 / p)

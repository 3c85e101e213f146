"""Persistence diagrams from data over Z/2 coefficients.

Builds Vietoris-Rips filtrations of point clouds and degree/weight
filtrations of graphs, computes persistence by boundary-matrix column
reduction (union-find shortcut in dimension 0), and provides a brute-force
Betti-number oracle by Gaussian elimination for verification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .diagram import PersistenceDiagram, PersistencePair
from .errors import ValidationError

__all__ = [
    "Simplex",
    "Filtration",
    "Graph",
    "rips_filtration",
    "degree_filtration",
    "weight_filtration",
    "compute_persistence",
    "betti_numbers",
]

MAX_SIMPLEX_DIM = 3


class Simplex(NamedTuple):
    """A simplex with a filtration value; vertices strictly increasing."""

    vertices: tuple[int, ...]
    value: float

    @property
    def dimension(self) -> int:
        return len(self.vertices) - 1


def _order_key(s: Simplex):
    return (s.value, len(s.vertices), s.vertices)


@dataclass(frozen=True)
class Filtration:
    """Simplices sorted by (value, dimension, vertex tuple).

    Construction validates the order, that vertex tuples are strictly
    increasing and values finite, and that every face of every simplex
    appears earlier in the sequence.
    """

    simplices: tuple[Simplex, ...]

    def __post_init__(self):
        simplices = tuple(
            s if isinstance(s, Simplex) else Simplex(tuple(s[0]), float(s[1]))
            for s in self.simplices
        )
        object.__setattr__(self, "simplices", simplices)
        index: dict[tuple[int, ...], int] = {}
        prev_key = None
        for i, s in enumerate(simplices):
            if len(s.vertices) < 1:
                raise ValidationError(f"simplex {i} has no vertices")
            if not math.isfinite(s.value):
                raise ValidationError(f"simplex {i} has non-finite value {s.value!r}")
            if any(a >= b for a, b in zip(s.vertices, s.vertices[1:])):
                raise ValidationError(
                    f"simplex {i} vertices not strictly increasing: {s.vertices}"
                )
            key = _order_key(s)
            if prev_key is not None and key <= prev_key:
                raise ValidationError(
                    f"simplices out of filtration order at position {i}: {s}"
                )
            prev_key = key
            if s.vertices in index:
                raise ValidationError(f"duplicate simplex {s.vertices}")
            for facet in _facets(s.vertices):
                if facet not in index:
                    raise ValidationError(
                        f"face {facet} of simplex {s.vertices} missing or out of order"
                    )
            index[s.vertices] = i

    def __len__(self) -> int:
        return len(self.simplices)

    def __iter__(self):
        return iter(self.simplices)

    @property
    def max_dimension(self) -> int:
        return max((s.dimension for s in self.simplices), default=-1)

    @property
    def max_value(self) -> float:
        return max((s.value for s in self.simplices), default=0.0)


def _facets(vertices: tuple[int, ...]):
    if len(vertices) < 2:
        return
    for i in range(len(vertices)):
        yield vertices[:i] + vertices[i + 1 :]


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph with optional per-edge weights."""

    n: int
    edges: tuple[tuple[int, int], ...]
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.n < 0:
            raise ValidationError(f"vertex count must be >= 0, got {self.n}")
        normalized = []
        for e in self.edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise ValidationError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValidationError(f"edge ({u},{v}) outside vertex range [0,{self.n})")
            normalized.append((min(u, v), max(u, v)))
        if self.weights is not None:
            if len(self.weights) != len(normalized):
                raise ValidationError(
                    f"{len(self.weights)} weights for {len(normalized)} edges"
                )
            order = sorted(range(len(normalized)), key=lambda i: normalized[i])
            edges = tuple(normalized[i] for i in order)
            weights = tuple(float(self.weights[i]) for i in order)
        else:
            edges = tuple(sorted(normalized))
            weights = None
        if len(set(edges)) != len(edges):
            raise ValidationError("duplicate edges")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "weights", weights)

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg


def rips_filtration(points, eps_max: float, max_dim: int) -> Filtration:
    """Vietoris-Rips filtration of a point cloud.

    Every simplex of dimension <= ``max_dim`` whose vertex set has pairwise
    Euclidean distances <= ``eps_max`` is included, valued at its diameter;
    vertices enter at value 0.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.ndim != 2:
        raise ValueError("points must be a sequence of equal-length coordinate tuples")
    if not eps_max > 0:
        raise ValueError(f"eps_max must be positive, got {eps_max!r}")
    if not 0 <= max_dim <= MAX_SIMPLEX_DIM:
        raise ValueError(f"max_dim must be in [0, {MAX_SIMPLEX_DIM}], got {max_dim}")
    n = len(pts)
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=-1))

    simplices = [Simplex((i,), 0.0) for i in range(n)]
    if max_dim >= 1:
        # neighbors with a larger id than each vertex
        nbrs = [
            {int(j) for j in np.flatnonzero(dist[i] <= eps_max) if j > i}
            for i in range(n)
        ]
        for i in range(n):
            for j in sorted(nbrs[i]):
                d_ij = dist[i, j]
                simplices.append(Simplex((i, j), float(d_ij)))
                if max_dim >= 2:
                    for k in sorted(nbrs[i] & nbrs[j]):
                        d_ijk = max(d_ij, dist[i, k], dist[j, k])
                        simplices.append(Simplex((i, j, k), float(d_ijk)))
                        if max_dim >= 3:
                            for l in sorted(nbrs[i] & nbrs[j] & nbrs[k]):
                                value = max(d_ijk, dist[i, l], dist[j, l], dist[k, l])
                                simplices.append(Simplex((i, j, k, l), float(value)))
    simplices.sort(key=_order_key)
    return Filtration(tuple(simplices))


def degree_filtration(g: Graph) -> Filtration:
    """Vertices valued by degree, edges by the larger endpoint degree."""
    deg = g.degrees()
    simplices = [Simplex((v,), float(deg[v])) for v in range(g.n)]
    simplices.extend(
        Simplex((u, v), float(max(deg[u], deg[v]))) for u, v in g.edges
    )
    simplices.sort(key=_order_key)
    return Filtration(tuple(simplices))


def weight_filtration(g: Graph, invert: bool = False) -> Filtration:
    """Edges valued by weight (or ``max_weight - weight`` when inverted);
    vertices enter at their smallest incident edge value, 0 if isolated."""
    if g.weights is None:
        raise ValueError("weight filtration requires per-edge weights")
    if g.edges:
        max_w = max(g.weights)
        edge_values = [max_w - w if invert else w for w in g.weights]
    else:
        edge_values = []
    vertex_value = [0.0] * g.n
    seen = [False] * g.n
    for (u, v), val in zip(g.edges, edge_values):
        for w in (u, v):
            if not seen[w] or val < vertex_value[w]:
                vertex_value[w] = val
                seen[w] = True
    simplices = [Simplex((v,), float(vertex_value[v])) for v in range(g.n)]
    simplices.extend(
        Simplex((u, v), float(val)) for (u, v), val in zip(g.edges, edge_values)
    )
    simplices.sort(key=_order_key)
    return Filtration(tuple(simplices))


class _UnionFind:
    """Union-find with elder rule: on a merge the older birth survives."""

    def __init__(self):
        self.parent: list[int] = []
        self.birth: list[tuple[float, int]] = []  # (birth value, vertex order)

    def add(self, birth_value: float) -> int:
        i = len(self.parent)
        self.parent.append(i)
        self.birth.append((birth_value, i))
        return i

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def merge(self, i: int, j: int) -> tuple[float, int] | None:
        """Merge the sets of i and j; return the dying (younger) birth, or
        None if already connected."""
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return None
        if self.birth[ri] <= self.birth[rj]:
            elder, younger = ri, rj
        else:
            elder, younger = rj, ri
        self.parent[younger] = elder
        return self.birth[younger]


def _reduce_block(columns: list[int], skip: set[int]):
    """Standard Z/2 column reduction of one dimension block.

    ``columns[j]`` is an integer bitmask over row indices.  Returns the
    pairing ``row -> column``, the set of columns that reduced to zero, and
    the set of columns cleared via ``skip`` (known positive in advance).
    """
    low_to_col: dict[int, int] = {}
    reduced: dict[int, int] = {}
    zero_cols: set[int] = set()
    for j, col in enumerate(columns):
        if j in skip:
            continue
        while col:
            low = col.bit_length() - 1
            other = low_to_col.get(low)
            if other is None:
                break
            col ^= reduced[other]
        if col:
            low_to_col[low] = j
            reduced[j] = col
        else:
            zero_cols.add(j)
    return low_to_col, zero_cols


def compute_persistence(f: Filtration, max_hom_dim: int) -> list[PersistenceDiagram]:
    """Persistence diagrams for dimensions ``0..max_hom_dim`` over Z/2.

    Dimension 0 uses union-find with the elder rule; higher dimensions use
    column reduction of the boundary matrix in filtration order, processing
    dimension blocks top-down so that simplices already paired as deaths are
    cleared (skipped) as columns.  Unpaired positive simplices yield
    essential pairs ``(value, +inf)``.
    """
    if max_hom_dim < 0:
        raise ValueError(f"max_hom_dim must be >= 0, got {max_hom_dim}")
    top_dim = f.max_dimension
    if max_hom_dim > max(top_dim, 0):
        raise ValueError(
            f"max_hom_dim {max_hom_dim} exceeds the filtration dimension {top_dim}"
        )

    by_dim: list[list[Simplex]] = [[] for _ in range(top_dim + 1)] if top_dim >= 0 else []
    for s in f:
        by_dim[s.dimension].append(s)
    local_index: list[dict[tuple[int, ...], int]] = [
        {s.vertices: i for i, s in enumerate(group)} for group in by_dim
    ]

    # dimension 0: union-find over vertices, edges in filtration order
    uf = _UnionFind()
    vertex_slot: dict[int, int] = {}
    pairs0: list[PersistencePair] = []
    negative_edges: set[int] = set()
    if top_dim >= 0:
        merge_events = []
        for s in by_dim[0]:
            vertex_slot[s.vertices[0]] = uf.add(s.value)
        if top_dim >= 1:
            for j, e in enumerate(by_dim[1]):
                u, v = e.vertices
                died = uf.merge(vertex_slot[u], vertex_slot[v])
                if died is not None:
                    negative_edges.add(j)
                    merge_events.append((died[0], e.value))
        pairs0 = [PersistencePair(b, d) for b, d in merge_events]
        roots = {uf.find(i) for i in range(len(uf.parent))}
        pairs0.extend(PersistencePair(uf.birth[r][0], math.inf) for r in roots)

    diagrams = [PersistenceDiagram(0, tuple(pairs0))]
    if max_hom_dim == 0:
        return diagrams

    # column reduction per dimension block, top-down for clearing
    reduce_top = min(top_dim, max_hom_dim + 1)
    pairings: dict[int, dict[int, int]] = {}  # q -> (row local idx -> col local idx)
    zero_columns: dict[int, set[int]] = {}
    cleared: dict[int, set[int]] = {}
    skip: set[int] = set()
    for q in range(reduce_top, 1, -1):
        columns = [
            _column_mask(s, local_index[q - 1]) for s in by_dim[q]
        ]
        low_to_col, zeros = _reduce_block(columns, skip)
        pairings[q] = low_to_col
        zero_columns[q] = zeros
        cleared[q] = skip
        skip = set(low_to_col.keys())  # rows killed here are positive below

    for p in range(1, max_hom_dim + 1):
        group = by_dim[p] if p <= top_dim else []
        if p == 1:
            positive = {j for j in range(len(group)) if j not in negative_edges}
        else:
            positive = zero_columns.get(p, set()) | cleared.get(p, set())
        killer = pairings.get(p + 1, {})
        pairs = []
        for row, col in killer.items():
            pairs.append(PersistencePair(group[row].value, by_dim[p + 1][col].value))
        for j in sorted(positive - set(killer.keys())):
            pairs.append(PersistencePair(group[j].value, math.inf))
        diagrams.append(PersistenceDiagram(p, tuple(pairs)))
    return diagrams


def _column_mask(s: Simplex, row_index: dict[tuple[int, ...], int]) -> int:
    mask = 0
    for facet in _facets(s.vertices):
        mask |= 1 << row_index[facet]
    return mask


def _gf2_rank(columns: Iterable[int]) -> int:
    """Rank of a Z/2 matrix given as integer column bitmasks."""
    pivots: dict[int, int] = {}
    rank = 0
    for col in columns:
        while col:
            low = col.bit_length() - 1
            if low in pivots:
                col ^= pivots[low]
            else:
                pivots[low] = col
                rank += 1
                break
    return rank


def betti_numbers(f: Filtration, eps: float, max_hom_dim: int) -> list[int]:
    """Brute-force Betti numbers of the subcomplex at scale ``eps``.

    Restricts the filtration to simplices with value <= eps and computes
    ``beta_p = #p-simplices - rank d_p - rank d_{p+1}`` by Gaussian
    elimination over Z/2.  Independent of the reduction algorithm; used as
    the correctness oracle for :func:`compute_persistence`.
    """
    if max_hom_dim < 0:
        raise ValueError(f"max_hom_dim must be >= 0, got {max_hom_dim}")
    by_dim: dict[int, list[Simplex]] = {}
    for s in f:
        if s.value <= eps:
            by_dim.setdefault(s.dimension, []).append(s)
    ranks: dict[int, int] = {}
    for q in range(1, max_hom_dim + 2):
        rows = {s.vertices: i for i, s in enumerate(by_dim.get(q - 1, []))}
        cols = [_column_mask(s, rows) for s in by_dim.get(q, [])]
        ranks[q] = _gf2_rank(cols)
    betti = []
    for p in range(max_hom_dim + 1):
        n_p = len(by_dim.get(p, []))
        betti.append(n_p - ranks.get(p, 0) - ranks.get(p + 1, 0))
    return betti

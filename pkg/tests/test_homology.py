"""Filtration builders and the reduction algorithm against the Betti oracle."""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np
import pytest

from pifs.diagram import PersistenceDiagram, TruncateAt, to_pif
from pifs.errors import ValidationError
from pifs.homology import (
    Filtration,
    Graph,
    Simplex,
    betti_numbers,
    compute_persistence,
    degree_filtration,
    rips_filtration,
    weight_filtration,
)


def _filtration(simplices):
    ordered = sorted(simplices, key=lambda s: (s.value, len(s.vertices), s.vertices))
    return Filtration(tuple(ordered))


def _cycle_graph_filtration(n, value=0.0):
    simplices = [Simplex((v,), value) for v in range(n)]
    simplices += [Simplex((i, (i + 1) % n) if i + 1 < n else (0, n - 1), value) for i in range(n)]
    fixed = []
    for s in simplices:
        fixed.append(Simplex(tuple(sorted(s.vertices)), s.value))
    return _filtration(fixed)


class TestGraph:
    def test_self_loop_rejected(self):
        with pytest.raises(ValidationError):
            Graph(2, [(0, 0)])

    def test_duplicate_rejected(self):
        with pytest.raises(ValidationError):
            Graph(2, [(0, 1), (1, 0)])

    def test_out_of_range_rejected(self):
        with pytest.raises(ValidationError):
            Graph(2, [(0, 5)])

    def test_edges_normalized(self):
        g = Graph(3, [(2, 1), (1, 0)])
        assert g.edges == ((0, 1), (1, 2))

    def test_weights_follow_edge_sort(self):
        g = Graph(3, [(2, 1), (1, 0)], weights=(5.0, 3.0))
        assert g.edges == ((0, 1), (1, 2))
        assert g.weights == (3.0, 5.0)


class TestFiltrationValidation:
    def test_out_of_order_rejected(self):
        with pytest.raises(ValidationError):
            Filtration((Simplex((0,), 1.0), Simplex((1,), 0.0)))

    def test_missing_face_rejected(self):
        with pytest.raises(ValidationError):
            Filtration((Simplex((0,), 0.0), Simplex((0, 1), 1.0)))

    def test_duplicate_rejected(self):
        with pytest.raises(ValidationError):
            Filtration((Simplex((0,), 0.0), Simplex((0,), 0.0)))

    def test_vertices_must_increase(self):
        with pytest.raises(ValidationError):
            Filtration((Simplex((1, 0), 0.0),))


class TestRips:
    def test_two_points(self):
        fil = rips_filtration([[0, 0], [1, 0]], eps_max=2, max_dim=1)
        assert len(fil) == 3
        edge = [s for s in fil if s.dimension == 1][0]
        assert edge.value == pytest.approx(1.0)
        verts = [s for s in fil if s.dimension == 0]
        assert all(v.value == 0.0 for v in verts)

    def test_equilateral_triangle(self):
        pts = [[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]]
        fil = rips_filtration(pts, eps_max=2, max_dim=2)
        assert len(fil) == 7
        tri = [s for s in fil if s.dimension == 2][0]
        assert tri.value == pytest.approx(1.0)

    def test_exhaustive_subset_oracle(self):
        rng = np.random.default_rng(0)
        pts = rng.random((8, 3))
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.sqrt((diff**2).sum(-1))
        eps = float(np.percentile(dist[np.triu_indices(8, 1)], 55))
        fil = rips_filtration(pts, eps, 3)
        got = {s.vertices: s.value for s in fil}
        expected = {}
        for size in range(1, 5):
            for comb in combinations(range(8), size):
                diam = max((dist[i, j] for i, j in combinations(comb, 2)), default=0.0)
                if diam <= eps:
                    expected[comb] = diam
        assert got.keys() == expected.keys()
        for key, value in expected.items():
            assert got[key] == pytest.approx(value, abs=1e-12)

    def test_eps_must_be_positive(self):
        with pytest.raises(ValueError):
            rips_filtration([[0, 0]], eps_max=0, max_dim=1)

    def test_max_dim_capped(self):
        with pytest.raises(ValueError):
            rips_filtration([[0, 0]], eps_max=1, max_dim=4)

    def test_ragged_points_rejected(self):
        with pytest.raises(ValueError):
            rips_filtration([[0, 0], [1, 2, 3]], eps_max=1, max_dim=1)


class TestGraphFiltrations:
    def test_degree_path(self):
        fil = degree_filtration(Graph(3, [(0, 1), (1, 2)]))
        vals = {s.vertices: s.value for s in fil}
        assert vals[(0,)] == 1 and vals[(1,)] == 2 and vals[(2,)] == 1
        assert vals[(0, 1)] == 2 and vals[(1, 2)] == 2

    def test_degree_triangle(self):
        fil = degree_filtration(Graph(3, [(0, 1), (1, 2), (0, 2)]))
        assert all(s.value == 2 for s in fil)

    def test_degree_star(self):
        g = Graph(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
        fil = degree_filtration(g)
        vals = {s.vertices: s.value for s in fil}
        assert vals[(0,)] == 4
        assert all(vals[(v,)] == 1 for v in range(1, 5))
        assert all(vals[e] == 4 for e in g.edges)

    def test_degree_no_simplices_above_dim_one(self):
        fil = degree_filtration(Graph(4, [(0, 1), (1, 2), (2, 3), (0, 3)]))
        assert fil.max_dimension == 1

    def test_weight_single_edge(self):
        fil = weight_filtration(Graph(2, [(0, 1)], weights=(3.0,)))
        vals = {s.vertices: s.value for s in fil}
        assert vals == {(0,): 3.0, (1,): 3.0, (0, 1): 3.0}

    def test_weight_invert(self):
        g = Graph(3, [(0, 1), (1, 2)], weights=(1.0, 5.0))
        fil = weight_filtration(g, invert=True)
        vals = {s.vertices: s.value for s in fil}
        assert vals[(0, 1)] == 4.0 and vals[(1, 2)] == 0.0
        assert vals[(1,)] == 0.0 and vals[(0,)] == 4.0 and vals[(2,)] == 0.0

    def test_weight_requires_weights(self):
        with pytest.raises(ValueError):
            weight_filtration(Graph(2, [(0, 1)]))

    def test_weight_order_matches_sort_oracle(self):
        rng = np.random.default_rng(1)
        n = 8
        edges = [e for e in combinations(range(n), 2) if rng.random() < 0.5]
        weights = tuple(float(w) for w in rng.uniform(0, 10, len(edges)))
        g = Graph(n, tuple(edges), weights)
        fil = weight_filtration(g)
        keys = [(s.value, len(s.vertices), s.vertices) for s in fil]
        assert keys == sorted(keys)
        vert_vals = {s.vertices[0]: s.value for s in fil if s.dimension == 0}
        for v in range(n):
            incident = [w for (a, b), w in zip(g.edges, g.weights) if v in (a, b)]
            assert vert_vals[v] == (min(incident) if incident else 0.0)

    def test_isolated_vertices_enter_at_zero(self):
        fil = weight_filtration(Graph(3, [(0, 1)], weights=(2.0,)))
        vals = {s.vertices: s.value for s in fil}
        assert vals[(2,)] == 0.0


class TestPersistence:
    def test_two_vertices_one_edge(self):
        fil = _filtration([Simplex((0,), 0.0), Simplex((1,), 0.0), Simplex((0, 1), 1.0)])
        dgms = compute_persistence(fil, 0)
        assert dgms[0] == PersistenceDiagram(0, [(0, 1), (0, math.inf)])

    def test_cycle_graph(self):
        fil = _cycle_graph_filtration(4)
        dgms = compute_persistence(fil, 1)
        assert dgms[0] == PersistenceDiagram(0, [(0, 0)] * 3 + [(0, math.inf)])
        assert dgms[1] == PersistenceDiagram(1, [(0, math.inf)])

    def test_elder_rule(self):
        # older component (birth 0) survives the merge at value 2
        fil = _filtration(
            [Simplex((0,), 0.0), Simplex((1,), 1.0), Simplex((0, 1), 2.0)]
        )
        dgms = compute_persistence(fil, 0)
        assert dgms[0] == PersistenceDiagram(0, [(1, 2), (0, math.inf)])

    def test_graph_dimension_one_all_essential(self):
        rng = np.random.default_rng(2)
        edges = [e for e in combinations(range(10), 2) if rng.random() < 0.4]
        g = Graph(10, tuple(edges))
        dgms = compute_persistence(degree_filtration(g), 1)
        assert all(p.is_essential for p in dgms[1])

    def test_betti_oracle_equivalence(self):
        rng = np.random.default_rng(3)
        for trial in range(6):
            pts = rng.random((10, 3))
            diff = pts[:, None, :] - pts[None, :, :]
            dist = np.sqrt((diff**2).sum(-1))
            eps = float(np.percentile(dist[np.triu_indices(10, 1)], 60))
            fil = rips_filtration(pts, eps, 3)
            dgms = compute_persistence(fil, 2)
            for t in np.linspace(0, eps, 26)[:25]:
                expected = betti_numbers(fil, float(t), 2)
                for p in range(3):
                    got = to_pif(dgms[p], TruncateAt(eps))(float(t))
                    assert got == expected[p], (trial, p, t)

    def test_pairing_injectivity(self):
        rng = np.random.default_rng(4)
        pts = rng.random((12, 3))
        eps = 0.7
        fil = rips_filtration(pts, eps, 3)
        dgms = compute_persistence(fil, 2)
        n_by_dim = {}
        for s in fil:
            n_by_dim[s.dimension] = n_by_dim.get(s.dimension, 0) + 1
        finite = {p: sum(1 for q in dgms[p] if not q.is_essential) for p in range(3)}
        essential = {p: sum(1 for q in dgms[p] if q.is_essential) for p in range(3)}
        # p-simplices either birth a p-class (finite or essential) or kill a (p-1)-class
        for p in range(3):
            killers_from_p = finite.get(p - 1, 0) if p >= 1 else 0
            births = finite[p] + essential[p] if p < 3 else 0
            if p < 3:
                assert births + killers_from_p == n_by_dim.get(p, 0)

    def test_order_invariance(self):
        rng = np.random.default_rng(5)
        pts = rng.random((9, 3))
        eps = 0.8
        base = compute_persistence(rips_filtration(pts, eps, 2), 1)
        for _ in range(3):
            perm = rng.permutation(9)
            shuffled = compute_persistence(rips_filtration(pts[perm], eps, 2), 1)
            for p in range(2):
                a = [(round(q.birth, 12), round(q.death, 12) if not q.is_essential else math.inf) for q in base[p]]
                b = [(round(q.birth, 12), round(q.death, 12) if not q.is_essential else math.inf) for q in shuffled[p]]
                assert sorted(a) == sorted(b)

    def test_max_hom_dim_validation(self):
        fil = _filtration([Simplex((0,), 0.0)])
        with pytest.raises(ValueError):
            compute_persistence(fil, 1)

    def test_zero_persistence_pairs_kept(self):
        fil = _filtration(
            [Simplex((0,), 0.0), Simplex((1,), 0.0), Simplex((0, 1), 0.0)]
        )
        dgms = compute_persistence(fil, 0)
        assert dgms[0] == PersistenceDiagram(0, [(0, 0), (0, math.inf)])


class TestBettiNumbers:
    def test_empty_complex(self):
        fil = _filtration([Simplex((0,), 1.0)])
        assert betti_numbers(fil, 0.5, 2) == [0, 0, 0]

    def test_cycle(self):
        assert betti_numbers(_cycle_graph_filtration(4), 0.0, 1) == [1, 1]

    def test_hollow_tetrahedron(self):
        simplices = [Simplex((i,), 0.0) for i in range(4)]
        simplices += [Simplex(c, 0.0) for c in combinations(range(4), 2)]
        simplices += [Simplex(c, 0.0) for c in combinations(range(4), 3)]
        fil = _filtration(simplices)
        assert betti_numbers(fil, 0.0, 2) == [1, 0, 1]

    def test_solid_tetrahedron(self):
        simplices = [Simplex((i,), 0.0) for i in range(4)]
        simplices += [Simplex(c, 0.0) for c in combinations(range(4), 2)]
        simplices += [Simplex(c, 0.0) for c in combinations(range(4), 3)]
        simplices += [Simplex((0, 1, 2, 3), 0.0)]
        fil = _filtration(simplices)
        assert betti_numbers(fil, 0.0, 2) == [1, 0, 0]

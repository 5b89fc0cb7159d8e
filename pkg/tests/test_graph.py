from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from fractalmix import generators as gen
from fractalmix import graph as gr
from fractalmix.errors import SpecError

from conftest import adjacency_dict, pure_python_bfs, random_connected_graph

LOG3 = math.log(3) / math.log(2)


class TestInvariantMeasure:
    def test_unit_triangle_uniform(self, triangle):
        assert np.allclose(gr.invariant_measure(triangle), 1 / 3)

    def test_path3_from_degrees(self, path3):
        # mu_x = degrees (1, 2, 1), total 4
        assert np.allclose(gr.invariant_measure(path3), [0.25, 0.5, 0.25])

    def test_single_edge(self, single_edge):
        assert np.allclose(gr.invariant_measure(single_edge), [0.5, 0.5])

    def test_sums_to_one(self):
        rng = np.random.default_rng(7)
        for k in range(5):
            g = random_connected_graph(rng, 30, 12, weighted=True)
            assert abs(gr.invariant_measure(g).sum() - 1.0) < 1e-12

    def test_detailed_balance_float(self):
        rng = np.random.default_rng(3)
        g = random_connected_graph(rng, 25, 10, weighted=True)
        pi = gr.invariant_measure(g)
        for x in range(g.vertex_count):
            lo, hi = g.indptr[x], g.indptr[x + 1]
            for e in range(lo, hi):
                y = int(g.indices[e])
                pxy = g.weights[e] / g.vertex_weight[x]
                eyx = np.flatnonzero(g.indices[g.indptr[y]:g.indptr[y + 1]] == x)[0]
                pyx = g.weights[g.indptr[y] + eyx] / g.vertex_weight[y]
                assert abs(pi[x] * pxy - pi[y] * pyx) < 1e-12

    def test_detailed_balance_rational_unit_weights(self, gasket3):
        # exact rational check for unit conductances
        g = gasket3
        total = Fraction(int(g.vertex_weight.sum()))
        for x in range(g.vertex_count):
            deg_x = g.degree(x)
            for y in g.neighbors(x):
                deg_y = g.degree(int(y))
                lhs = Fraction(deg_x, 1) / total * Fraction(1, deg_x)
                rhs = Fraction(deg_y, 1) / total * Fraction(1, deg_y)
                assert lhs == rhs


class TestConstructionValidation:
    def test_self_loop_rejected(self):
        with pytest.raises(SpecError):
            gen.build_graph_from_triples(2, [(0, 0, 1.0)])

    def test_duplicate_edge_rejected(self):
        with pytest.raises(SpecError):
            gen.build_graph_from_triples(2, [(0, 1, 1.0), (1, 0, 2.0)])

    def test_nonpositive_weight_rejected(self):
        with pytest.raises(SpecError) as err:
            gen.build_graph_from_triples(2, [(0, 1, 0.0)])
        assert err.value.condition == "ellipticity"

    def test_disconnected_rejected(self):
        with pytest.raises(SpecError) as err:
            gen.build_graph_from_triples(4, [(0, 1, 1.0), (2, 3, 1.0)])
        assert err.value.condition == "connectivity"

    def test_mu_x_is_sum_of_incident_conductances(self):
        rng = np.random.default_rng(11)
        g = random_connected_graph(rng, 40, 15, weighted=True)
        resummed = np.zeros(g.vertex_count)
        for x in range(g.vertex_count):
            resummed[x] = g.weights[g.indptr[x]:g.indptr[x + 1]].sum()
        assert np.allclose(resummed, g.vertex_weight, atol=1e-12)
        assert abs(g.total_weight - resummed.sum()) < 1e-9


class TestDiameter:
    def test_single_edge(self, single_edge):
        assert gr.diameter(single_edge) == gr.DiameterResult(1, True)

    def test_cycle8(self, cycle8):
        assert gr.diameter(cycle8).value == 4

    def test_level1_gasket_brute(self):
        g = gen.build_gasket(gen.GasketSpec(level=1))
        adj = adjacency_dict(g)
        brute = max(max(pure_python_bfs(adj, s).values())
                    for s in range(g.vertex_count))
        assert gr.diameter(g).value == brute == 2

    @pytest.mark.parametrize("builder", [
        lambda: gen.build_gasket(gen.GasketSpec(level=4)),
        lambda: gen.build_carpet(gen.central_hole_carpet_spec(2, 3, 1, 2)),
        lambda: gen.build_torus(2, 10),
    ])
    def test_matches_brute_bfs(self, builder):
        g = builder()
        adj = adjacency_dict(g)
        brute = max(max(pure_python_bfs(adj, s).values())
                    for s in range(g.vertex_count))
        assert gr.diameter(g).value == brute

    def test_double_sweep_is_lower_bound(self, gasket4):
        exact = gr.diameter(gasket4).value
        bound = gr.diameter(gasket4, exact_cap=10)
        assert not bound.exact
        assert bound.value <= exact
        assert bound.value >= exact // 2  # double sweep is at least half


class TestBalls:
    def test_radius_zero(self, cycle8):
        assert gr.ball(cycle8, 3, 0).tolist() == [3]

    def test_radius_at_least_diameter(self, cycle8):
        assert gr.ball(cycle8, 0, 4).size == 8

    def test_cycle8_radius2_has_5_vertices(self, cycle8):
        assert gr.ball(cycle8, 0, 2).size == 5

    def test_nesting(self, gasket3):
        rng = np.random.default_rng(0)
        for _ in range(20):
            x = int(rng.integers(gasket3.vertex_count))
            r1, r2 = sorted(rng.integers(0, 9, size=2))
            b1 = set(gr.ball(gasket3, x, int(r1)).tolist())
            b2 = set(gr.ball(gasket3, x, int(r2)).tolist())
            assert b1 <= b2


class TestMetrics:
    def test_t_n_recomputable(self, gasket3):
        m = gr.metrics_for(gasket3, d_f=LOG3, d_w=math.log(5) / math.log(2))
        assert m.diameter == 8 and m.diameter_exact
        assert abs(m.t_n - 8.0 ** m.d_w) < 1e-12
        assert m.total_weight == gasket3.total_weight

    def test_ball_volume_is_ball_mass(self, cycle8):
        assert gr.ball_volume(cycle8, 0, 2) == 10.0   # 5 vertices of degree 2


class TestAssumptions:
    def test_unit_weights_give_ce_1(self, gasket3):
        assert gr.check_assumptions(gasket3, LOG3).c_e == 1.0

    def test_triangle_p0_half(self, triangle):
        assert gr.check_assumptions(triangle, 1.0).p_0 == 0.5

    def test_gasket5_passes(self, gasket5):
        rep = gr.check_assumptions(gasket5, LOG3)
        assert rep.all_ok
        assert np.isfinite(rep.c_v) and rep.c_v >= 1.0
        assert rep.max_degree == 4
        assert rep.delta_ratio == 2.0

    def test_rough_weights_raise_ce(self, gasket3):
        rough = gen.rough_weights(gasket3, c_e=2.0, seed=5)
        rep = gr.check_assumptions(rough, LOG3)
        assert 1.0 < rep.c_e <= 2.0 + 1e-12
        assert rep.all_ok

    def test_sampled_centers_consistent_with_enumeration(self, gasket4):
        full = gr.check_assumptions(gasket4, LOG3)
        sampled = gr.check_assumptions(gasket4, LOG3, sample_centers=60)
        # sampling a subset can only lower the constant
        assert sampled.c_v <= full.c_v + 1e-12


class TestVolumeGrowth:
    def test_path_is_one_dimensional(self):
        fit = gr.volume_growth_fit(gen.build_path(1000), samples=40, seed=0)
        assert abs(fit.d_f - 1.0) <= 0.05

    def test_torus_is_two_dimensional(self):
        fit = gr.volume_growth_fit(gen.build_torus(2, 64), samples=40, seed=0)
        assert abs(fit.d_f - 2.0) <= 0.15

    def test_small_graph_rejected(self, triangle):
        with pytest.raises(SpecError):
            gr.volume_growth_fit(triangle)


class TestWgJson:
    def test_round_trip_byte_identical(self, gasket3):
        text = gr.to_wg_json(gasket3)
        again = gr.to_wg_json(gr.from_wg_json(text))
        assert text == again

    def test_rejects_bad_format(self):
        with pytest.raises(SpecError):
            gr.from_wg_json('{"format":"nope"}')

    def test_rejects_duplicate_edges(self):
        doc = ('{"format":"wg-json/1","directed":false,'
               '"vertices":[{"id":0},{"id":1}],'
               '"edges":[{"u":0,"v":1,"mu":1.0},{"u":1,"v":0,"mu":1.0}]}')
        with pytest.raises(SpecError) as err:
            gr.from_wg_json(doc)
        assert err.value.condition == "duplicate"

    def test_rejects_zero_weight(self):
        doc = ('{"format":"wg-json/1","directed":false,'
               '"vertices":[{"id":0},{"id":1}],'
               '"edges":[{"u":0,"v":1,"mu":0.0}]}')
        with pytest.raises(SpecError) as err:
            gr.from_wg_json(doc)
        assert err.value.condition == "ellipticity"

    def test_rejects_disconnected(self):
        doc = ('{"format":"wg-json/1","directed":false,'
               '"vertices":[{"id":0},{"id":1},{"id":2},{"id":3}],'
               '"edges":[{"u":0,"v":1,"mu":1.0},{"u":2,"v":3,"mu":1.0}]}')
        with pytest.raises(SpecError) as err:
            gr.from_wg_json(doc)
        assert err.value.condition == "connectivity"

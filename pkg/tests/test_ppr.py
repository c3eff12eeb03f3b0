from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pprembed import (
    Graph,
    GraphHandle,
    approximate_ppr,
    exact_ppr,
)

from conftest import make_connected_graph, make_er_graph

# Closed forms from the restart fixed point, cross-checked against the
# power-iteration oracle below: K2 source mass is 1/(2 - alpha); on the
# triangle the two non-source masses are (1 - alpha)/2 / (1 + (1 - alpha)/2).
K2_SOURCE = 0.5405405405405405
K2_OTHER = 0.45945945945945943
TRI_SOURCE = 0.4035087719298246
TRI_OTHER = 0.2982456140350877


def k2_handle():
    return GraphHandle.in_memory(Graph.from_edges(np.array([[0, 1]])))


def triangle_handle():
    return GraphHandle.in_memory(Graph.from_edges(np.array([[0, 1], [1, 2], [0, 2]])))


class TestExactPpr:
    def test_k2_closed_form(self):
        pi = exact_ppr(k2_handle(), 0, 0.15, 1e-13)
        assert pi[0] == pytest.approx(K2_SOURCE, abs=1e-11)
        assert pi[1] == pytest.approx(K2_OTHER, abs=1e-11)
        assert pi.sum() == pytest.approx(1.0, abs=1e-12)

    def test_triangle_closed_form(self):
        pi = exact_ppr(triangle_handle(), 0, 0.15, 1e-13)
        assert pi[0] == pytest.approx(TRI_SOURCE, abs=1e-11)
        assert pi[1] == pytest.approx(TRI_OTHER, abs=1e-11)
        assert pi[2] == pytest.approx(TRI_OTHER, abs=1e-11)

    def test_vertex_transitive_symmetry(self):
        # Complete graph: every non-source node is equivalent.
        n = 6
        pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
        handle = GraphHandle.in_memory(Graph.from_edges(np.array(pairs)))
        pi = exact_ppr(handle, 2, 0.15, 1e-12)
        others = np.delete(pi, 2)
        assert np.allclose(others, others[0], atol=1e-11)

    def test_decay_close_to_one_pins_the_source(self):
        g = make_er_graph(30, 4.0, seed=9)
        pi = exact_ppr(GraphHandle.in_memory(g), 7, 0.999, 1e-12)
        assert pi[7] >= 0.999

    def test_degree_zero_source_keeps_all_mass(self):
        g = Graph.from_edges(np.array([[0, 1]]), node_count=3)
        pi = exact_ppr(GraphHandle.in_memory(g), 2, 0.15, 1e-12)
        assert pi[2] == pytest.approx(1.0, abs=1e-12)

    def test_domain_errors(self):
        with pytest.raises(IndexError):
            exact_ppr(k2_handle(), 5, 0.15, 1e-10)
        with pytest.raises(ValueError):
            exact_ppr(k2_handle(), 0, 1.5, 1e-10)
        with pytest.raises(ValueError):
            exact_ppr(k2_handle(), 0, 0.15, 0.0)


class TestApproximatePpr:
    def test_self_loop_orbit(self):
        g = Graph.from_edges(np.array([[0, 0]]))
        vec, _ = approximate_ppr(GraphHandle.in_memory(g), 0, 0.3, 1e-3)
        assert vec.entries[0] > 1 - 1e-3
        assert 1.0 - vec.entries[0] < 1e-3 * 1  # pi(v) = 1 exactly, deg = 1

    def test_k2_within_degree_scaled_error(self):
        for eps in (1e-2, 1e-4, 1e-6):
            vec, _ = approximate_ppr(k2_handle(), 0, 0.15, eps)
            assert 0 <= K2_SOURCE - vec.entries[0] < eps * 1
            assert 0 <= K2_OTHER - vec.entries.get(1, 0.0) < eps * 1

    def test_triangle_within_degree_scaled_error(self):
        eps = 1e-3
        vec, _ = approximate_ppr(triangle_handle(), 0, 0.15, eps)
        exact = [TRI_SOURCE, TRI_OTHER, TRI_OTHER]
        for u in range(3):
            diff = exact[u] - vec.entries.get(u, 0.0)
            assert 0 <= diff < eps * 2

    @pytest.mark.parametrize("seed", range(8))
    def test_epsilon_approximation_against_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(20, 120))
        g = make_connected_graph(n, 3.0, seed=seed)
        handle = GraphHandle.in_memory(g)
        eps = float(rng.choice([1e-2, 1e-3, 1e-4]))
        source = int(rng.integers(0, n))
        vec, _ = approximate_ppr(handle, source, 0.15, eps)
        pi = exact_ppr(handle, source, 0.15, 1e-13)
        degrees = g.degrees()
        for u in range(n):
            diff = pi[u] - vec.entries.get(u, 0.0)
            assert diff >= -1e-10
            assert diff < eps * degrees[u] + 1e-10

    def test_mass_conservation_instrumented(self):
        g = make_er_graph(60, 5.0, seed=4)
        vec, _ = approximate_ppr(
            GraphHandle.in_memory(g), 0, 0.15, 1e-4, check_conservation=True
        )
        assert vec.mass_sum <= 1 + 1e-12

    def test_masses_strictly_positive_and_sorted(self):
        g = make_er_graph(60, 5.0, seed=5)
        vec, _ = approximate_ppr(GraphHandle.in_memory(g), 3, 0.15, 1e-3)
        ids = list(vec.entries)
        assert ids == sorted(ids)
        assert all(m > 0 for m in vec.entries.values())

    def test_support_connected_to_source(self):
        g = make_er_graph(80, 3.0, seed=6)
        handle = GraphHandle.in_memory(g)
        vec, _ = approximate_ppr(handle, 11, 0.15, 1e-4)
        support = set(vec.entries)
        seen = {11}
        frontier = [11]
        while frontier:
            u = frontier.pop()
            for w in g.neighbors(u).tolist():
                if w in support and w not in seen:
                    seen.add(w)
                    frontier.append(w)
        assert support <= seen

    def test_monotone_precision_support_nesting(self):
        for seed in range(6):
            g = make_er_graph(80, 4.0, seed=seed)
            handle = GraphHandle.in_memory(g)
            v = int(np.random.default_rng(seed).integers(0, 80))
            coarse, _ = approximate_ppr(handle, v, 0.15, 1e-2)
            mid, _ = approximate_ppr(handle, v, 0.15, 1e-3)
            fine, _ = approximate_ppr(handle, v, 0.15, 1e-4)
            assert set(coarse.entries) <= set(mid.entries) <= set(fine.entries)

    def test_locality_and_push_bounds(self):
        alpha = 0.15
        for seed, eps in ((0, 1e-2), (1, 1e-3), (2, 1e-4)):
            g = make_er_graph(2000, 8.0, seed=seed)
            handle = GraphHandle.in_memory(g)
            _, stats = approximate_ppr(handle, 17, alpha, eps)
            assert stats.nodes_touched <= 2 / ((1 - alpha) * eps)
            assert stats.push_count <= 4 / (alpha * eps)
            assert stats.support_volume == sum(
                g.degree(u) for u in approximate_ppr(handle, 17, alpha, eps)[0].entries
            )

    def test_determinism_bit_identical(self):
        g = make_er_graph(100, 5.0, seed=7)
        handle = GraphHandle.in_memory(g)
        a, stats_a = approximate_ppr(handle, 9, 0.15, 1e-4)
        b, stats_b = approximate_ppr(handle, 9, 0.15, 1e-4)
        assert list(a.entries.items()) == list(b.entries.items())
        assert stats_a == stats_b

    def test_degree_zero_source_is_absorbing(self):
        g = Graph.from_edges(np.array([[0, 1]]), node_count=3)
        vec, stats = approximate_ppr(GraphHandle.in_memory(g), 2, 0.15, 1e-3)
        assert vec.entries == {2: 1.0}
        assert stats.push_count == 1
        assert stats.nodes_touched == 0

    def test_high_degree_source_can_yield_empty_estimate(self):
        star = Graph.from_edges(np.array([[0, i] for i in range(1, 201)]))
        vec, stats = approximate_ppr(GraphHandle.in_memory(star), 0, 0.15, 1e-2)
        # threshold eps * deg(0) = 2 exceeds the unit residual: no push fires
        assert vec.entries == {}
        assert stats.push_count == 0

    def test_domain_errors(self):
        with pytest.raises(IndexError):
            approximate_ppr(k2_handle(), 2, 0.15, 1e-3)
        with pytest.raises(ValueError):
            approximate_ppr(k2_handle(), 0, 0.0, 1e-3)
        with pytest.raises(ValueError):
            approximate_ppr(k2_handle(), 0, 0.15, 0.0)
        with pytest.raises(ValueError):
            approximate_ppr(k2_handle(), 0, 0.15, 1.5)

    def test_concurrent_calls_share_one_handle(self):
        g = make_er_graph(150, 5.0, seed=8)
        handle = GraphHandle.in_memory(g)
        reference = {
            v: approximate_ppr(handle, v, 0.15, 1e-3)[0].entries for v in range(16)
        }
        with ThreadPoolExecutor(max_workers=8) as pool:
            results = list(
                pool.map(lambda v: approximate_ppr(handle, v, 0.15, 1e-3), range(16))
            )
        for v, (vec, _) in enumerate(results):
            assert vec.entries == reference[v]

    @given(st.integers(0, 10_000))
    def test_mass_never_exceeds_one(self, seed):
        g = make_er_graph(40, 3.0, seed=seed % 17)
        vec, _ = approximate_ppr(
            GraphHandle.in_memory(g), seed % 40, 0.15, 10.0 ** -(seed % 4 + 1)
        )
        assert vec.mass_sum <= 1 + 1e-12

import numpy as np
import pytest

from pprembed import Graph, erdos_renyi_edges, two_block_sbm


class TestErdosRenyi:
    def test_edge_count_near_expectation(self):
        edges = erdos_renyi_edges(500, p=0.02, seed=9)
        expected = 500 * 499 / 2 * 0.02
        sigma = np.sqrt(expected * 0.98)
        assert abs(len(edges) - expected) < 5 * sigma

    def test_pairs_are_clean(self):
        edges = erdos_renyi_edges(300, avg_degree=6.0, seed=1)
        assert (edges[:, 0] < edges[:, 1]).all()
        assert len(np.unique(edges, axis=0)) == len(edges)

    def test_deterministic(self):
        a = erdos_renyi_edges(200, p=0.05, seed=3)
        b = erdos_renyi_edges(200, p=0.05, seed=3)
        assert np.array_equal(a, b)

    def test_degenerate_probabilities(self):
        assert len(erdos_renyi_edges(50, p=0.0, seed=0)) == 0
        assert len(erdos_renyi_edges(10, p=1.0, seed=0)) == 45

    def test_avg_degree_parameterization(self):
        edges = erdos_renyi_edges(2000, avg_degree=10.0, seed=5)
        g = Graph.from_edges(edges, node_count=2000)
        assert g.degrees().mean() == pytest.approx(10.0, rel=0.1)

    def test_exactly_one_density_parameter(self):
        with pytest.raises(ValueError):
            erdos_renyi_edges(10, p=0.1, avg_degree=2.0)
        with pytest.raises(ValueError):
            erdos_renyi_edges(10)


class TestTwoBlockSbm:
    def test_block_labels(self):
        _, labels = two_block_sbm(301, 0.2, 0.01, seed=2)
        assert labels.tolist() == [0] * 150 + [1] * 151

    def test_edge_densities_near_expectation(self):
        edges, _ = two_block_sbm(300, 0.15, 0.01, seed=4)
        within = int(((edges[:, 0] < 150) == (edges[:, 1] < 150)).sum())
        cross = len(edges) - within
        expected_within = 2 * (150 * 149 / 2) * 0.15
        expected_cross = 150 * 150 * 0.01
        assert abs(within - expected_within) < 5 * np.sqrt(expected_within)
        assert abs(cross - expected_cross) < 5 * np.sqrt(expected_cross)

    def test_deterministic(self):
        a, _ = two_block_sbm(100, 0.2, 0.02, seed=7)
        b, _ = two_block_sbm(100, 0.2, 0.02, seed=7)
        assert np.array_equal(a, b)

    def test_builds_valid_graph(self):
        edges, _ = two_block_sbm(120, 0.2, 0.01, seed=8)
        g = Graph.from_edges(edges, node_count=120)
        g.validate()

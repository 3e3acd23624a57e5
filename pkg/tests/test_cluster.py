import itertools

import numpy as np
import pytest

from affinity_miner import (
    Clustering,
    clustering_error,
    hitting_times,
    k_destinations,
    labels_from_clustering,
    mcl,
    nmi,
    random_walk_matrix,
)
from affinity_miner.cluster import mcl_flow, _mcl_seed_matrix
from affinity_miner.errors import EmptyGraph, KOutOfRange, LengthMismatch

from conftest import make_graph, random_ergodic_chain, two_block_graph


# -- independent oracles ------------------------------------------------------

def direct_hitting_times(P: np.ndarray) -> np.ndarray:
    """Per-target linear solve: h_j = 0, h_i = 1 + sum_m P(i,m) h_m."""
    n = P.shape[0]
    H = np.zeros((n, n))
    for j in range(n):
        A = np.eye(n) - P
        A[j, :] = 0.0
        A[j, j] = 1.0
        b = np.ones(n)
        b[j] = 0.0
        H[:, j] = np.linalg.solve(A, b)
    return H


def naive_nmi(x, y) -> float:
    """Definition-level mutual information over joint counts."""
    n = len(x)
    from collections import Counter

    cx, cy, cxy = Counter(x), Counter(y), Counter(zip(x, y))
    hx = -sum(c / n * np.log(c / n) for c in cx.values())
    hy = -sum(c / n * np.log(c / n) for c in cy.values())
    if hx == 0.0 and hy == 0.0:
        return 1.0
    if hx == 0.0 or hy == 0.0:
        return 0.0
    mi = sum(
        c / n * np.log(n * c / (cx[a] * cy[b])) for (a, b), c in cxy.items()
    )
    return mi / np.sqrt(hx * hy)


def brute_force_error(pred, truth) -> float:
    """Enumerate label permutations, keep the best match count."""
    n = len(pred)
    labels = sorted(set(pred) | set(truth))
    best = 0
    for perm in itertools.permutations(labels):
        mapping = dict(zip(labels, perm))
        best = max(best, sum(1 for p, t in zip(pred, truth) if mapping[p] == t))
    return 1.0 - best / n


# -- random walk matrix -------------------------------------------------------

class TestRandomWalkMatrix:
    def test_rows_sum_to_one(self, rng):
        g = two_block_graph(5)
        P = random_walk_matrix(g)
        assert np.allclose(P.entries.sum(axis=1), 1.0, atol=1e-12)

    def test_two_node_single_edge(self):
        g = make_graph([("a", "b", 1.0)])
        P = random_walk_matrix(g, tau=0.01)
        assert np.allclose(P.entries[0], [0.005, 0.995])
        # dangling target row becomes uniform before mixing
        assert np.allclose(P.entries[1], [0.5, 0.5])

    def test_entries_at_least_teleport_share(self):
        g = two_block_graph(4)
        P = random_walk_matrix(g, tau=0.05)
        assert P.entries.min() >= 0.05 / len(P.nodes) - 1e-15

    def test_empty_graph(self):
        from affinity_miner.graph import AffinityGraph

        with pytest.raises(EmptyGraph):
            random_walk_matrix(AffinityGraph(nodes={}, edges={}))

    def test_bad_tau(self):
        g = make_graph([("a", "b", 1.0)])
        with pytest.raises(ValueError):
            random_walk_matrix(g, tau=1.0)


# -- hitting times -------------------------------------------------------------

class TestHittingTimes:
    def test_diagonal_zero(self, rng):
        P = random_ergodic_chain(rng, 6)
        H = hitting_times(P).entries
        assert np.all(np.diag(H) == 0.0)

    def test_two_state_geometric(self):
        P = np.array([[0.5, 0.5], [0.5, 0.5]])
        H = hitting_times(P).entries
        assert H[0, 1] == pytest.approx(2.0, abs=1e-10)

    @pytest.mark.parametrize("n", [2, 3, 5, 8])
    def test_complete_graph_uniform_walk(self, n):
        P = (np.ones((n, n)) - np.eye(n)) / (n - 1)
        H = hitting_times(P).entries
        off = H[~np.eye(n, dtype=bool)]
        assert np.allclose(off, n - 1, atol=1e-8)

    def test_matches_direct_solve(self, rng):
        for _ in range(30):
            n = int(rng.integers(2, 21))
            P = random_ergodic_chain(rng, n)
            H = hitting_times(P).entries
            assert np.max(np.abs(H - direct_hitting_times(P))) < 1e-8

    def test_off_diagonal_positive(self, rng):
        P = random_ergodic_chain(rng, 7)
        H = hitting_times(P).entries
        assert (H[~np.eye(7, dtype=bool)] > 0).all()


# -- MCL ------------------------------------------------------------------------

class TestMcl:
    def test_two_disjoint_triangles(self):
        edge_list = []
        for base in (0, 3):
            for i, j in [(0, 1), (1, 2), (2, 0)]:
                edge_list.append((f"n{base+i}", f"n{base+j}", 1.0))
                edge_list.append((f"n{base+j}", f"n{base+i}", 1.0))
        g = make_graph(edge_list)
        c = mcl(g)
        got = sorted(tuple(sorted(cl)) for cl in c.clusters)
        assert got == [("n0", "n1", "n2"), ("n3", "n4", "n5")]
        # oracle: connected components
        assert len(got) == 2

    def test_complete_graph_single_cluster(self):
        edge_list = [
            (f"n{i}", f"n{j}", 1.0) for i in range(5) for j in range(5) if i != j
        ]
        g = make_graph(edge_list)
        c = mcl(g)
        assert len(c.clusters) == 1
        assert c.clusters[0] == frozenset(f"n{i}" for i in range(5))

    def test_single_node(self):
        from affinity_miner.graph import AffinityGraph
        from affinity_miner import parse_mbti

        g = AffinityGraph(nodes={"solo": parse_mbti("INFJ")}, edges={})
        c = mcl(g)
        assert [set(x) for x in c.clusters] == [{"solo"}]

    def test_deterministic(self):
        g = two_block_graph(6)
        c1, c2 = mcl(g), mcl(g)
        assert c1.clusters == c2.clusters
        assert c1.iterations == c2.iterations

    def test_column_sums_stay_one(self):
        g = two_block_graph(6, in_w=0.8, cross_w=0.05)
        M = _mcl_seed_matrix(g, tuple(g.sorted_nodes()))
        for step, M_next in zip(range(30), mcl_flow(M)):
            assert np.max(np.abs(M_next.sum(axis=0) - 1.0)) < 1e-9

    def test_block_recovery(self):
        g = two_block_graph(8, in_w=1.0, cross_w=0.01)
        c = mcl(g)
        assert len(c.clusters) == 2
        sizes = sorted(len(x) for x in c.clusters)
        assert sizes == [8, 8]

    def test_parameter_validation(self):
        g = two_block_graph(3)
        with pytest.raises(ValueError):
            mcl(g, e=1)
        with pytest.raises(ValueError):
            mcl(g, r=1.0)

    def test_iteration_cap_returns_partial_result(self):
        g = two_block_graph(6, in_w=1.0, cross_w=0.1)
        c = mcl(g, max_iter=1)
        assert not c.converged
        assert c.iterations == 1
        assert c.clusters

    def test_prune_above_all_entries_survives(self):
        g = make_graph(
            [(f"n{i}", f"n{j}", 1.0) for i in range(4) for j in range(4) if i != j]
        )
        c = mcl(g, prune=0.5)
        assert c.clusters


# -- k-destinations --------------------------------------------------------------

class TestKDestinations:
    def test_k1_single_cluster(self):
        g = two_block_graph(4)
        c = k_destinations(g, 1)
        assert len(c.clusters) == 1
        assert c.clusters[0] == frozenset(g.nodes)

    def test_kn_singletons(self):
        g = two_block_graph(3)
        c = k_destinations(g, len(g.nodes))
        assert sorted(len(x) for x in c.clusters) == [1] * len(g.nodes)

    def test_two_blocks_recovered(self):
        g = two_block_graph(10, in_w=1.0, cross_w=0.01)
        c = k_destinations(g, 2)
        truth = np.array([0] * 10 + [1] * 10)
        labels = labels_from_clustering(c)
        assert nmi(labels, truth) == 1.0
        assert clustering_error(labels, truth) == 0.0

    def test_disjoint_and_total(self):
        g = two_block_graph(6, in_w=1.0, cross_w=0.05)
        c = k_destinations(g, 3)
        all_members = [u for cl in c.clusters for u in cl]
        assert sorted(all_members) == sorted(g.nodes)
        assert len(all_members) == len(set(all_members))

    def test_objective_non_increasing(self):
        g = two_block_graph(8, in_w=1.0, cross_w=0.2)
        c = k_destinations(g, 4)
        trace = c.objective_trace
        assert all(a >= b - 1e-9 for a, b in zip(trace, trace[1:]))

    def test_k_out_of_range(self):
        g = two_block_graph(2)
        with pytest.raises(KOutOfRange):
            k_destinations(g, 0)
        with pytest.raises(KOutOfRange):
            k_destinations(g, len(g.nodes) + 1)

    def test_deterministic(self):
        g = two_block_graph(5, in_w=0.9, cross_w=0.1)
        c1 = k_destinations(g, 2)
        c2 = k_destinations(g, 2)
        assert c1.clusters == c2.clusters
        assert c1.destinations == c2.destinations

    def test_single_directed_edge(self):
        # teleportation keeps hitting times finite on weakly connected input
        g = make_graph([("a", "b", 1.0)])
        c = k_destinations(g, 2)
        assert sorted(sorted(x) for x in c.clusters) == [["a"], ["b"]]

    def test_disconnected_components_recovered(self):
        edge_list = []
        for base in (0, 10):
            for i in range(5):
                for j in range(5):
                    if i != j:
                        edge_list.append((f"m{base + i}", f"m{base + j}", 1.0))
        g = make_graph(edge_list)
        c = k_destinations(g, 2)
        assert sorted(len(x) for x in c.clusters) == [5, 5]
        # each cluster must be exactly one component
        components = [
            {f"m{base + i}" for i in range(5)} for base in (0, 10)
        ]
        assert {frozenset(x) for x in c.clusters} == {frozenset(x) for x in components}


# -- metrics ----------------------------------------------------------------------

class TestNmi:
    def test_identical_is_exactly_one(self):
        assert nmi([0, 0, 1, 1], [0, 0, 1, 1]) == 1.0

    def test_independent_is_zero(self):
        assert nmi([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(0.0, abs=1e-12)

    def test_relabeled_is_exactly_one(self):
        assert nmi([0, 0, 1, 1], [5, 5, 2, 2]) == 1.0

    def test_symmetric(self, rng):
        for _ in range(50):
            n = int(rng.integers(2, 15))
            x = rng.integers(0, 4, size=n)
            y = rng.integers(0, 4, size=n)
            assert abs(nmi(x, y) - nmi(y, x)) < 1e-12

    def test_one_constant_labeling(self):
        assert nmi([0, 0, 0], [0, 1, 2]) == 0.0
        assert nmi([0, 0, 0], [1, 1, 1]) == 1.0

    def test_matches_naive_oracle(self, rng):
        for _ in range(100):
            n = int(rng.integers(1, 13))
            k = int(rng.integers(1, 6))
            x = [int(v) for v in rng.integers(0, k, size=n)]
            y = [int(v) for v in rng.integers(0, k, size=n)]
            assert nmi(x, y) == pytest.approx(naive_nmi(x, y), abs=1e-10)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            nmi([0, 1], [0, 1, 2])

    def test_range(self, rng):
        for _ in range(50):
            x = rng.integers(0, 3, size=10)
            y = rng.integers(0, 3, size=10)
            assert 0.0 <= nmi(x, y) <= 1.0


class TestClusteringError:
    def test_exact_match(self):
        assert clustering_error([0, 1, 2], [0, 1, 2]) == 0.0

    def test_any_permutation_is_zero(self, rng):
        for _ in range(20):
            truth = rng.integers(0, 4, size=12)
            perm = rng.permutation(4)
            pred = perm[truth]
            assert clustering_error(pred, truth) == 0.0

    def test_quarter_error(self):
        assert clustering_error([0, 0, 0, 1], [0, 0, 1, 1]) == 0.25

    def test_matches_brute_force(self, rng):
        for _ in range(100):
            n = int(rng.integers(1, 13))
            k = int(rng.integers(1, 6))
            pred = [int(v) for v in rng.integers(0, k, size=n)]
            truth = [int(v) for v in rng.integers(0, k, size=n)]
            assert clustering_error(pred, truth) == brute_force_error(pred, truth)

    def test_different_label_set_sizes(self):
        assert clustering_error([0, 0, 0, 0], [0, 0, 1, 1]) == 0.5

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            clustering_error([0], [0, 1])


class TestLabelsFromClustering:
    def base(self, clusters, overlapping, attraction=None, nodes=("a", "b", "c")):
        return Clustering(
            clusters=tuple(frozenset(c) for c in clusters),
            method="mcl" if overlapping else "k-destinations",
            params={},
            overlapping=overlapping,
            nodes=tuple(nodes),
            iterations=1,
            converged=True,
            attraction=attraction,
        )

    def test_disjoint_direct_mapping(self):
        c = self.base([{"a"}, {"b", "c"}], overlapping=False)
        assert list(labels_from_clustering(c)) == [0, 1, 1]

    def test_overlap_argmax_attraction(self):
        attraction = np.array([[0.3, 1.0, 0.7], [0.7, 0.0, 0.3]])
        c = self.base(
            [{"a", "b", "c"}, {"a", "c"}], overlapping=True, attraction=attraction
        )
        assert list(labels_from_clustering(c)) == [1, 0, 0]

    def test_equal_attraction_smaller_index(self):
        attraction = np.array([[0.5, 0.5, 0.5], [0.5, 0.5, 0.5]])
        c = self.base(
            [{"a", "b", "c"}, {"a", "b", "c"}], overlapping=True, attraction=attraction
        )
        assert list(labels_from_clustering(c)) == [0, 0, 0]

    def test_overlap_without_attraction_first_cluster(self):
        c = self.base([{"a", "b"}, {"b", "c"}], overlapping=True)
        assert list(labels_from_clustering(c)) == [0, 0, 1]

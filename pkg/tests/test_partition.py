"""Tests para el particionado en silos."""

import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score

from src.graph import TransactionGraph, generate_synthetic
from src.partition import (
    FilePartitioner,
    PartitionError,
    SiloPartition,
    balance_bounds,
    balanced_edgecut,
    communities_to_silos,
    create_partitioner,
    cross_edge_fraction,
    louvain,
    read_partition_file,
    write_partition_file,
)


def brute_force(graph, assignment, num_silos):
    """Conjuntos frontera y aristas cruzadas recorriendo arista por arista."""
    boundary = [set() for _ in range(num_silos)]
    crossing = 0
    for u, v in zip(graph.src.tolist(), graph.dst.tolist()):
        if assignment[u] != assignment[v]:
            crossing += 1
            boundary[assignment[u]].add(u)
            boundary[assignment[v]].add(v)
    return boundary, crossing


class TestSiloPartition:
    """Tests para SiloPartition."""

    def test_matches_brute_force(self, small_graph):
        """Test fracción cruzada y fronteras contra un recorrido directo."""
        rng = np.random.default_rng(0)
        for _ in range(20):
            k = int(rng.integers(2, 5))
            assignment = rng.integers(0, k, size=small_graph.num_nodes)
            partition = SiloPartition.from_assignment(small_graph, assignment, k)
            boundary, crossing = brute_force(small_graph, assignment, k)

            assert partition.cross_edge_fraction == pytest.approx(
                crossing / small_graph.num_edges
            )
            assert cross_edge_fraction(partition, small_graph) == pytest.approx(
                crossing / small_graph.num_edges
            )
            for silo in range(k):
                assert set(partition.boundary_sets[silo].tolist()) == boundary[silo]

    def test_routing_targets(self, tiny_graph):
        """Test destinos de envío y enlaces cruzados en un grafo de 4 nodos."""
        partition = SiloPartition.from_assignment(tiny_graph, np.array([0, 0, 1, 1]), 2)

        assert partition.boundary_counts() == [1, 2]
        assert {j: t.tolist() for j, t in partition.routing_targets(0).items()} == {1: [1]}
        assert {j: t.tolist() for j, t in partition.routing_targets(1).items()} == {0: [2, 3]}
        assert partition.cross_links(1).tolist() == [[2, 1], [3, 1]]

    def test_assignment_out_of_range(self, tiny_graph):
        with pytest.raises(PartitionError):
            SiloPartition.from_assignment(tiny_graph, np.array([0, 0, 2, 1]), 2)

    def test_assignment_wrong_length(self, tiny_graph):
        with pytest.raises(PartitionError):
            SiloPartition.from_assignment(tiny_graph, np.array([0, 1]), 2)

    def test_single_silo_has_no_boundary(self, small_graph):
        partition = create_partitioner("edgecut").partition(small_graph, 1, seed=0)

        assert partition.num_silos == 1
        assert partition.cross_edge_fraction == 0.0
        assert partition.boundary_counts() == [0]


class TestLouvain:
    """Tests para Louvain y el agrupamiento en silos."""

    def test_recovers_planted_communities(self):
        """Test ARI >= 0.9 sobre un SBM bien separado."""
        graph = generate_synthetic(
            num_communities=4, nodes_per_community=50, p_intra=0.3, p_inter=0.002, seed=11
        )
        labeling = louvain(graph, seed=42)

        assert adjusted_rand_score(graph.communities, labeling.labels) >= 0.9
        assert labeling.modularity > 0.5

    @pytest.mark.parametrize("seed", [3, 17])
    def test_recovers_three_blocks(self, seed):
        graph = generate_synthetic(
            num_communities=3, nodes_per_community=50, p_intra=0.3, p_inter=0.005, seed=seed
        )

        labeling = louvain(graph, seed=0)

        assert adjusted_rand_score(graph.communities, labeling.labels) >= 0.9

    def test_deterministic_by_seed(self, small_graph):
        a = louvain(small_graph, seed=42)
        b = louvain(small_graph, seed=42)

        np.testing.assert_array_equal(a.labels, b.labels)

    def test_bin_packing(self):
        """Test comunidades de mayor a menor al silo menos cargado, sin dividirlas."""
        graph = TransactionGraph(
            num_nodes=12, src=np.empty(0), dst=np.empty(0),
            features=np.zeros((12, 1)), labels=np.zeros(12),
        )
        labels = np.array([0] * 5 + [1] * 3 + [2] * 2 + [3] * 2)
        partition = communities_to_silos(labels, 2, graph)

        assert partition.silo_sizes() == [7, 5]
        for community in range(4):
            assert np.unique(partition.assignment[labels == community]).shape[0] == 1

    def test_greedy_packing_example(self):
        """Test tamaños {50, 30, 20, 10} con K=2: silos {50, 10} y {30, 20}."""
        labels = np.repeat(np.arange(4), [50, 30, 20, 10])
        graph = TransactionGraph(
            num_nodes=110, src=np.empty(0), dst=np.empty(0),
            features=np.zeros((110, 1)), labels=np.zeros(110),
        )

        partition = communities_to_silos(labels, 2, graph)

        assert partition.silo_sizes() == [60, 50]
        assert partition.assignment[0] == partition.assignment[-1]

    def test_disjoint_triangles(self):
        graph = TransactionGraph(
            num_nodes=6, src=np.array([0, 1, 2, 3, 4, 5]), dst=np.array([1, 2, 0, 4, 5, 3]),
            features=np.zeros((6, 1)), labels=np.zeros(6),
        )

        labeling = louvain(graph, seed=0)

        assert labeling.num_communities == 2
        assert labeling.labels.tolist() == [0, 0, 0, 1, 1, 1]

    def test_single_node(self):
        graph = TransactionGraph(
            num_nodes=1, src=np.empty(0), dst=np.empty(0),
            features=np.zeros((1, 1)), labels=np.zeros(1),
        )

        labeling = louvain(graph, seed=0)

        assert labeling.num_communities == 1
        assert labeling.modularity == 0.0

    def test_fewer_communities_than_silos(self, tiny_graph):
        with pytest.raises(PartitionError):
            communities_to_silos(np.zeros(4, dtype=np.int64), 2, tiny_graph)


class TestEdgeCut:
    """Tests para la heurística de corte balanceado."""

    def test_balanced_sizes(self, small_graph):
        partition = balanced_edgecut(small_graph, 3, seed=1)
        lo, hi = balance_bounds(small_graph.num_nodes, 3)

        assert all(lo <= size <= hi for size in partition.silo_sizes())

    def test_cut_below_random(self, small_graph):
        """Test que el corte es mucho menor que el de una asignación aleatoria."""
        partition = balanced_edgecut(small_graph, 3, seed=1)

        assert partition.cross_edge_fraction < 0.5

    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_path_is_cut_once(self, seed):
        """Test camino de 4 nodos con K=2: una sola arista cruzada."""
        graph = TransactionGraph(
            num_nodes=4, src=np.array([0, 1, 2]), dst=np.array([1, 2, 3]),
            features=np.zeros((4, 1)), labels=np.zeros(4),
        )

        partition = balanced_edgecut(graph, 2, seed=seed)

        assert partition.silo_sizes() == [2, 2]
        assert partition.cross_edges.shape[0] == 1
        assert partition.cross_edge_fraction == pytest.approx(1 / 3)

    def test_cut_beats_random_balanced_assignments(self):
        """Test que el corte no supera al mejor de 100 repartos balanceados al azar."""
        graph = generate_synthetic(
            num_communities=4, nodes_per_community=50, p_intra=0.1, p_inter=0.01, seed=21
        )
        rng = np.random.default_rng(0)
        halves = np.repeat([0, 1], graph.num_nodes // 2)
        random_cuts = [
            cross_edge_fraction(
                SiloPartition.from_assignment(graph, rng.permutation(halves), 2), graph
            )
            for _ in range(100)
        ]

        partition = balanced_edgecut(graph, 2, seed=0)

        assert partition.cross_edge_fraction <= min(random_cuts)

    def test_deterministic_by_seed(self, small_graph):
        a = balanced_edgecut(small_graph, 3, seed=9)
        b = balanced_edgecut(small_graph, 3, seed=9)

        np.testing.assert_array_equal(a.assignment, b.assignment)

    def test_too_many_silos(self, tiny_graph):
        with pytest.raises(PartitionError):
            balanced_edgecut(tiny_graph, 5, seed=0)


class TestPartitionFiles:
    """Tests para archivos de partición node_id<TAB>silo_id."""

    def test_write_and_read(self, tmp_path, tiny_graph):
        partition = SiloPartition.from_assignment(tiny_graph, np.array([1, 0, 1, 0]), 2)
        path = write_partition_file(partition, tiny_graph, tmp_path / "p.tsv")

        assert path.read_text().splitlines()[0] == "10\t1"
        loaded = read_partition_file(path, tiny_graph)
        np.testing.assert_array_equal(loaded.assignment, partition.assignment)

    def test_file_k_takes_precedence(self, tmp_path, tiny_graph):
        """Test que el K del archivo prevalece sobre el solicitado."""
        path = tmp_path / "p.tsv"
        path.write_text("10\t0\n11\t0\n12\t1\n13\t1\n")

        partition = FilePartitioner({"path": str(path)}).partition(tiny_graph, 5, seed=0)

        assert partition.num_silos == 2
        assert partition.method == "file"

    def test_missing_node(self, tmp_path, tiny_graph):
        path = tmp_path / "p.tsv"
        path.write_text("10\t0\n11\t0\n12\t1\n")

        with pytest.raises(PartitionError):
            read_partition_file(path, tiny_graph)

    def test_unknown_node(self, tmp_path, tiny_graph):
        path = tmp_path / "p.tsv"
        path.write_text("10\t0\n11\t0\n12\t1\n99\t1\n")

        with pytest.raises(PartitionError):
            read_partition_file(path, tiny_graph)

    def test_unsupported_method(self):
        with pytest.raises(PartitionError) as exc_info:
            create_partitioner("metis")

        assert "louvain" in str(exc_info.value)

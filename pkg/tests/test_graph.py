"""Tests para el modelo de grafo, la ingesta y los splits."""

import numpy as np
import pytest

from src.graph import (
    LABEL_ILLICIT,
    LABEL_LICIT,
    LABEL_UNKNOWN,
    DataFormatError,
    GraphError,
    ReferentialIntegrityError,
    SplitRule,
    TransactionGraph,
    build_knn_graph,
    generate_synthetic,
    load_elliptic,
    load_elliptic_dir,
    load_ethereum,
    load_graph_text,
    make_split,
    normalize_features,
    save_graph_text,
)


def write_elliptic(tmp_path, features=None, classes=None, edges=None):
    features = features or "101,1,0.5,0.2\n102,1,0.1,0.3\n103,40,0.9,0.7\n"
    classes = classes or "txId,class\n101,1\n102,2\n103,unknown\n"
    edges = edges or "txId1,txId2\n101,102\n102,103\n"
    (tmp_path / "elliptic_txs_features.csv").write_text(features)
    (tmp_path / "elliptic_txs_classes.csv").write_text(classes)
    (tmp_path / "elliptic_txs_edgelist.csv").write_text(edges)
    return tmp_path


class TestTransactionGraph:
    """Tests para TransactionGraph."""

    def test_neighbors(self, tiny_graph):
        """Test vecinos de salida y de entrada."""
        assert tiny_graph.out_neighbors(1).tolist() == [2, 3]
        assert sorted(tiny_graph.in_neighbors(3).tolist()) == [1, 2]
        assert tiny_graph.out_neighbors(3).size == 0

    def test_csr_matches_edge_list(self, small_graph):
        """Test que ambos CSR reproducen exactamente la lista de aristas."""
        edges = sorted(zip(small_graph.src.tolist(), small_graph.dst.tolist()))

        out_edges = sorted(
            (u, int(v)) for u in range(small_graph.num_nodes)
            for v in small_graph.out_neighbors(u)
        )
        in_edges = sorted(
            (int(u), v) for v in range(small_graph.num_nodes)
            for u in small_graph.in_neighbors(v)
        )

        assert out_edges == edges
        assert in_edges == edges

    def test_edge_out_of_range(self):
        """Test arista con extremo inexistente."""
        with pytest.raises(GraphError):
            TransactionGraph(
                num_nodes=2, src=np.array([0]), dst=np.array([2]),
                features=np.zeros((2, 1)), labels=np.zeros(2),
            )

    def test_invalid_labels(self):
        """Test etiquetas fuera de {-1, 0, 1}."""
        with pytest.raises(GraphError):
            TransactionGraph(
                num_nodes=2, src=np.array([0]), dst=np.array([1]),
                features=np.zeros((2, 1)), labels=np.array([0, 2]),
            )

    def test_arrays_are_read_only(self, tiny_graph):
        """Test que el grafo no se puede modificar después de construido."""
        with pytest.raises(ValueError):
            tiny_graph.features[0, 0] = 99.0
        with pytest.raises(ValueError):
            tiny_graph.src[0] = 3

    def test_mean_aggregator(self, tiny_graph):
        """Test agregación por media sobre la unión de vecinos."""
        agg = tiny_graph.mean_aggregator.toarray()
        np.testing.assert_allclose(agg.sum(axis=1), np.ones(4))
        # Vecinos del nodo 1: 0 (entrada), 2 y 3 (salida)
        np.testing.assert_allclose(agg[1], [1 / 3, 0, 1 / 3, 1 / 3])

    def test_isolated_node_aggregates_to_zero(self):
        """Test que un nodo aislado agrega un vector nulo."""
        graph = TransactionGraph(
            num_nodes=3, src=np.array([0]), dst=np.array([1]),
            features=np.ones((3, 2)), labels=np.zeros(3),
        )
        agg = graph.mean_aggregator @ graph.features
        np.testing.assert_array_equal(agg[2], [0.0, 0.0])

    def test_subgraph_keeps_external_ids(self, tiny_graph):
        """Test subgrafo inducido con ids externos y aristas re-indexadas."""
        sub = tiny_graph.subgraph(np.array([3, 1]))
        assert sub.node_ids.tolist() == [11, 13]
        assert sub.num_edges == 1
        assert (sub.src.tolist(), sub.dst.tolist()) == ([0], [1])

    def test_label_counts(self, tiny_graph):
        assert tiny_graph.label_counts() == {"illicit": 2, "licit": 2, "unknown": 0}


class TestEllipticLoader:
    """Tests para la ingesta del layout de Elliptic."""

    def test_load(self, tmp_path):
        """Test carga de los tres CSV."""
        graph = load_elliptic_dir(write_elliptic(tmp_path))

        assert graph.num_nodes == 3
        assert graph.num_edges == 2
        assert graph.feature_dim == 2
        assert graph.node_ids.tolist() == [101, 102, 103]
        assert graph.labels.tolist() == [LABEL_ILLICIT, LABEL_LICIT, LABEL_UNKNOWN]
        assert graph.time_step.tolist() == [1, 1, 40]

    def test_unknown_txid_in_edgelist(self, tmp_path):
        """Test arista que referencia un txId inexistente."""
        write_elliptic(tmp_path, edges="txId1,txId2\n101,102\n102,999\n")

        with pytest.raises(ReferentialIntegrityError) as exc_info:
            load_elliptic_dir(tmp_path)

        assert "elliptic_txs_edgelist.csv:3" in str(exc_info.value)

    def test_malformed_feature_row(self, tmp_path):
        """Test fila con un valor no numérico."""
        write_elliptic(tmp_path, features="101,1,0.5,0.2\n102,1,abc,0.3\n103,40,0.9,0.7\n")

        with pytest.raises(DataFormatError) as exc_info:
            load_elliptic_dir(tmp_path)

        assert exc_info.value.line == 2

    def test_invalid_class(self, tmp_path):
        """Test clase fuera de {1, 2, unknown}."""
        write_elliptic(tmp_path, classes="txId,class\n101,3\n")

        with pytest.raises(DataFormatError):
            load_elliptic_dir(tmp_path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(GraphError):
            load_elliptic(tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv")


class TestEthereumAndKnn:
    """Tests para el grafo k-NN y el dataset de Ethereum."""

    def test_knn_neighbors(self):
        """Test vecino más cercano sobre puntos en una recta."""
        points = np.array([[0.0], [1.0], [3.0], [7.0]])
        graph = build_knn_graph(points, k=1)

        assert graph.src.tolist() == [0, 1, 2, 3]
        assert graph.dst.tolist() == [1, 0, 1, 2]

    def test_knn_matches_brute_force(self):
        """Test k-NN contra la búsqueda exhaustiva sobre todas las distancias."""
        points = np.random.default_rng(11).normal(size=(50, 4))
        dist = ((points[:, None, :] - points[None, :, :]) ** 2).sum(axis=2)
        np.fill_diagonal(dist, np.inf)
        expected = np.argsort(dist, axis=1, kind="stable")[:, :5]

        graph = build_knn_graph(points, k=5, chunk_size=7)

        np.testing.assert_array_equal(graph.dst.reshape(50, 5), expected)
        assert graph.metadata == {"knn_k": 5}

    def test_knn_tie_goes_to_lowest_id(self):
        graph = build_knn_graph(np.array([[0.0], [1.0], [2.0]]), k=1)

        assert graph.dst.tolist() == [1, 0, 1]

    def test_knn_k_too_large(self):
        with pytest.raises(GraphError):
            build_knn_graph(np.zeros((3, 2)), k=3)

    def test_load_ethereum(self, tmp_path):
        """Test carga del CSV de cuentas con columna FLAG."""
        path = tmp_path / "transaction_dataset.csv"
        rows = ["Index,Address,FLAG,sent,received"]
        for i in range(6):
            rows.append(f"{i},0xabc{i},{i % 2},{i * 1.5},{10 - i}")
        path.write_text("\n".join(rows) + "\n")

        graph = load_ethereum(path, k=2)

        assert graph.num_nodes == 6
        assert graph.num_edges == 12
        assert graph.feature_dim == 2
        assert graph.labels.tolist() == [0, 1, 0, 1, 0, 1]
        assert graph.metadata == {"knn_k": 2, "dataset": "ethereum"}

    def test_ethereum_invalid_flag(self, tmp_path):
        path = tmp_path / "transaction_dataset.csv"
        path.write_text("FLAG,sent\n0,1.0\n2,2.0\n1,3.0\n")

        with pytest.raises(DataFormatError) as exc_info:
            load_ethereum(path, k=1)

        assert exc_info.value.line == 3


class TestTextFormat:
    """Tests para el formato de texto <prefix>.nodes / <prefix>.edges."""

    def test_export_and_import(self, tmp_path, small_graph):
        """Test que la exportación conserva ids, etiquetas y aristas."""
        prefix = tmp_path / "graph"
        save_graph_text(small_graph, prefix)
        loaded = load_graph_text(prefix)

        np.testing.assert_array_equal(loaded.node_ids, small_graph.node_ids)
        np.testing.assert_array_equal(loaded.labels, small_graph.labels)
        np.testing.assert_array_equal(loaded.src, small_graph.src)
        np.testing.assert_array_equal(loaded.dst, small_graph.dst)
        np.testing.assert_allclose(loaded.features, small_graph.features, rtol=1e-6)

    def test_edge_to_unknown_node(self, tmp_path, tiny_graph):
        prefix = tmp_path / "graph"
        nodes_path, edges_path = save_graph_text(tiny_graph, prefix)
        edges_path.write_text("src\tdst\n10\t11\n10\t77\n")

        with pytest.raises(ReferentialIntegrityError):
            load_graph_text(prefix)


class TestSyntheticAndSplits:
    """Tests para el generador sintético y las máscaras de evaluación."""

    def test_synthetic_is_deterministic(self):
        a = generate_synthetic(seed=3, nodes_per_community=30)
        b = generate_synthetic(seed=3, nodes_per_community=30)

        np.testing.assert_array_equal(a.src, b.src)
        np.testing.assert_array_equal(a.features, b.features)
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_synthetic_without_inter_edges(self):
        graph = generate_synthetic(
            num_communities=4, nodes_per_community=30, p_intra=0.2, p_inter=0.0, seed=5
        )

        assert graph.num_edges > 0
        assert (graph.communities[graph.src] == graph.communities[graph.dst]).all()

    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_synthetic_intra_edge_count(self, seed):
        """Test que las aristas internas siguen la binomial sobre pares no ordenados."""
        communities, size, p = 3, 80, 0.1
        graph = generate_synthetic(
            num_communities=communities, nodes_per_community=size, p_intra=p,
            p_inter=0.01, seed=seed,
        )

        intra = int((graph.communities[graph.src] == graph.communities[graph.dst]).sum())
        pairs = communities * size * (size - 1) // 2
        mean, std = pairs * p, np.sqrt(pairs * p * (1 - p))
        assert abs(intra - mean) < 4 * std
        assert (graph.src != graph.dst).all()

    def test_synthetic_rejects_inverted_probabilities(self):
        with pytest.raises(GraphError):
            generate_synthetic(p_intra=0.01, p_inter=0.1)

    def test_temporal_split(self, small_graph):
        """Test regla temporal: entrenamiento hasta el paso 34."""
        mask = make_split(small_graph, SplitRule.temporal(34))

        assert (small_graph.time_step[mask.train] <= 34).all()
        assert (small_graph.time_step[mask.test] > 34).all()
        assert not (mask.train & mask.test).any()
        assert mask.train.any() and mask.test.any()

    def test_unlabeled_nodes_are_excluded(self):
        graph = generate_synthetic(unlabeled_fraction=0.5, seed=1)
        mask = make_split(graph, SplitRule.random(0.7, seed=0))

        unknown = graph.labels == LABEL_UNKNOWN
        assert not mask.train[unknown].any()
        assert not mask.test[unknown].any()

    def test_temporal_split_without_test_steps(self, small_graph):
        """Test regla que no deja nodos de prueba."""
        with pytest.raises(GraphError):
            make_split(small_graph, SplitRule.temporal(100))

    def test_random_split_fraction(self, small_graph):
        mask = make_split(small_graph, SplitRule.random(0.7, seed=5))
        counts = mask.counts()

        assert counts["train"] == pytest.approx(0.7 * small_graph.num_nodes, abs=1)
        assert counts["train"] + counts["test"] == small_graph.num_nodes

    def test_normalize_uses_train_statistics(self):
        features = np.array([[0.0], [2.0], [100.0]])
        out = normalize_features(features, np.array([True, True, False]))

        np.testing.assert_allclose(out[:2, 0], [-1.0, 1.0])
        assert out[2, 0] == pytest.approx(99.0)

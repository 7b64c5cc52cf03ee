"""Tests para el protocolo federado: FedAvg, rondas, ruteo y contabilidad."""

import numpy as np
import pandas as pd
import pytest

import src.federation.protocol as protocol
from src.federation import (
    METRIC_COLUMNS,
    AggregationServer,
    CommReport,
    ProtocolError,
    evaluate,
    fedavg,
    local_view,
    mean_std,
    run_experiment,
    run_round,
    run_seed,
    setup_federation,
    summarize,
    train_centralized,
    write_metrics_csv,
)
from src.gnn import EmbeddingBatch, ModelError, SageModel
from src.graph.model import NodeMask
from src.partition import SiloPartition
from src.tunnel import ENVELOPE_OVERHEAD, AuthenticationError, create_kem_provider


@pytest.fixture(scope="module")
def provider():
    return create_kem_provider("kyber-py")


@pytest.fixture
def two_silos(tiny_graph):
    return SiloPartition.from_assignment(tiny_graph, np.array([0, 0, 1, 1]), 2)


@pytest.fixture
def tiny_mask():
    return NodeMask(role=np.array([1, 2, 1, 2], dtype=np.int8), rule="manual")


def without_timing(rounds):
    return [r.as_row() for r in rounds]


class TestFedAvg:
    """Tests para la agregación FedAvg."""

    def test_weighted_mean(self):
        """Test media ponderada con pesos normalizados."""
        a = SageModel.initialize(3, hidden=2, seed=0)
        b = SageModel.initialize(3, hidden=2, seed=1)

        out = fedavg([a, b], [1.0, 3.0])

        np.testing.assert_allclose(out.flatten(), 0.25 * a.flatten() + 0.75 * b.flatten())

    def test_zero_weight_is_ignored(self):
        a = SageModel.initialize(3, hidden=2, seed=0)
        b = SageModel.initialize(3, hidden=2, seed=1)

        out = fedavg([a, b], [0.0, 5.0])

        np.testing.assert_array_equal(out.flatten(), b.flatten())

    def test_identical_models_are_exact(self):
        a = SageModel.initialize(3, hidden=2, seed=0)

        out = fedavg([a, a.copy(), a.copy()], [1.0, 2.0, 7.0])

        np.testing.assert_array_equal(out.flatten(), a.flatten())

    def test_invalid_inputs(self):
        a = SageModel.initialize(3, hidden=2, seed=0)

        with pytest.raises(ProtocolError):
            fedavg([], [])
        with pytest.raises(ProtocolError):
            fedavg([a], [-1.0])
        with pytest.raises(ProtocolError):
            fedavg([a, a], [0.0, 0.0])
        with pytest.raises(ModelError):
            fedavg([a, SageModel.initialize(4, hidden=2)], [1.0, 1.0])


class TestAggregationServer:
    """Tests para el servidor de agregación."""

    def test_unregistered_recipient(self):
        server = AggregationServer(SageModel.initialize(2, hidden=2))

        with pytest.raises(ProtocolError):
            server.public_key(3)

    def test_all_zero_weights_fall_back_to_uniform(self):
        a = SageModel.initialize(3, hidden=2, seed=0)
        b = SageModel.initialize(3, hidden=2, seed=1)
        server = AggregationServer(a)
        server.upload_model(1, b, 0)
        server.upload_model(0, a, 0)

        out = server.aggregate()

        np.testing.assert_allclose(out.flatten(), 0.5 * (a.flatten() + b.flatten()))
        assert server.num_uploads == 0

    def test_aggregate_without_uploads(self):
        server = AggregationServer(SageModel.initialize(3, hidden=2))

        with pytest.raises(ProtocolError):
            server.aggregate()

    def test_delivered_envelopes_do_not_accumulate(
        self, tiny_graph, two_silos, tiny_mask, fast_config, provider
    ):
        """Test que por defecto solo se retienen los sobres de la última ruta."""
        config = fast_config.with_overrides(num_silos=2, hidden=4, rounds=4)
        clients, server = setup_federation(tiny_graph, two_silos, tiny_mask, config, 0, provider)

        sizes = []
        for t in range(1, 5):
            run_round(clients, server, t, config, provider=provider)
            sizes.append(len(server.observable_bytes()))

        assert len(set(sizes)) == 1
        model_bytes = clients[0].model.num_parameters * 8
        assert sizes[0] - model_bytes == server.get_stats(round=4)["envelope_bytes"]


class TestRound:
    """Tests para una ronda del protocolo con dos silos."""

    def test_routing_and_buffers(self, tiny_graph, two_silos, tiny_mask, fast_config, provider):
        """Test que cada silo recibe solo los embeddings de sus vecinos foráneos."""
        config = fast_config.with_overrides(num_silos=2, hidden=4)
        clients, server = setup_federation(tiny_graph, two_silos, tiny_mask, config, 0, provider)

        metrics = run_round(clients, server, 1, config, provider=provider)

        assert metrics.envelopes == 2
        assert metrics.dropped == 0
        assert sorted(clients[0].buffer) == [12, 13]
        assert sorted(clients[1].buffer) == [11]
        assert all(r == 1 for _, r in clients[0].buffer.values())
        embed = (4 + 1 * (8 + 4 * 4)) + (4 + 2 * (8 + 4 * 4))
        assert metrics.bytes_embed == embed
        assert metrics.bytes_overhead == 2 * ENVELOPE_OVERHEAD
        assert metrics.bytes_model == clients[0].model.num_parameters * 4 * 2

    def test_buffers_lag_one_round(self, tiny_graph, two_silos, tiny_mask, fast_config, provider):
        """Test que la ronda 1 entrena sin alineación y la ronda 2 con la de la ronda 1."""
        config = fast_config.with_overrides(num_silos=2, hidden=4, lam=0.5)
        clients, server = setup_federation(tiny_graph, two_silos, tiny_mask, config, 0, provider)

        first = run_round(clients, server, 1, config, provider=provider)
        second = run_round(clients, server, 2, config, provider=provider)

        assert first.loss_bnd == 0.0
        assert second.loss_bnd > 0.0
        assert all(r == 2 for _, r in clients[1].buffer.values())

    def test_exchange_stops_after_window(
        self, small_graph, community_partition, small_mask, fast_config, provider
    ):
        """Test que pasada la ventana de intercambio no hay sobres ni buffers nuevos."""
        config = fast_config.with_overrides(rounds=4, exchange_rounds=2, lam=0.5)
        clients, server = setup_federation(
            small_graph, community_partition, small_mask, config, 0, provider
        )

        metrics = [run_round(clients, server, t, config, provider=provider) for t in (1, 2)]
        frozen = [{k: r for k, (_, r) in c.buffer.items()} for c in clients]
        metrics += [run_round(clients, server, t, config, provider=provider) for t in (3, 4)]

        assert all(m.bytes_embed > 0 for m in metrics[:2])
        assert [(m.envelopes, m.bytes_embed, m.bytes_overhead) for m in metrics[2:]] == [
            (0, 0, 0), (0, 0, 0)
        ]
        assert any(frozen)
        for client, before in zip(clients, frozen):
            assert {k: r for k, (_, r) in client.buffer.items()} == before
        assert server.get_stats(round=3)["envelopes"] == 0

    def test_server_never_sees_plaintext(
        self, small_graph, community_partition, small_mask, fast_config, provider, monkeypatch
    ):
        """Test que ningún lote en claro ni clave secreta aparece en lo que guarda el servidor."""
        captured = []
        original = protocol.encrypt_batch

        def spy(public_key, batch, *args, **kwargs):
            captured.append(batch)
            return original(public_key, batch, *args, **kwargs)

        monkeypatch.setattr(protocol, "encrypt_batch", spy)
        clients, server = setup_federation(
            small_graph, community_partition, small_mask, fast_config, 0, provider
        )
        server.keep_archive = True
        for t in (1, 2):
            run_round(clients, server, t, fast_config, provider=provider)

        observed = server.observable_bytes()
        assert captured
        for batch in captured:
            assert batch.to_bytes() not in observed
            for vector in batch.vectors:
                assert vector.tobytes() not in observed
        for client in clients:
            assert client.keys.secret_key not in observed

    def test_failed_envelope_is_dropped(
        self, tiny_graph, two_silos, tiny_mask, fast_config, provider, monkeypatch
    ):
        """Test que un sobre que no autentica se descarta y la ronda continúa."""
        original = protocol.decrypt_batch
        calls = []

        def flaky(secret_key, envelope, *args, **kwargs):
            calls.append(envelope.recipient)
            if len(calls) == 1:
                raise AuthenticationError("tag inválido")
            return original(secret_key, envelope, *args, **kwargs)

        monkeypatch.setattr(protocol, "decrypt_batch", flaky)
        config = fast_config.with_overrides(num_silos=2, hidden=4)
        clients, server = setup_federation(tiny_graph, two_silos, tiny_mask, config, 0, provider)

        metrics = run_round(clients, server, 1, config, provider=provider)

        assert metrics.dropped == 1
        assert metrics.envelopes == 2
        assert sum(len(c.buffer) for c in clients) in (1, 2)

    def test_silo_without_training_nodes(self, tiny_graph, two_silos, fast_config):
        """Test que un silo sin entrenamiento se marca y no pesa en FedAvg."""
        mask = NodeMask(role=np.array([1, 1, 2, 2], dtype=np.int8), rule="manual")
        config = fast_config.with_overrides(num_silos=2, hidden=4, mode="fedavg")
        clients, server = setup_federation(tiny_graph, two_silos, mask, config, 0)

        metrics = run_round(clients, server, 1, config)

        assert metrics.flagged_silos == (1,)
        np.testing.assert_array_equal(
            server.global_model.flatten(), clients[0].model.flatten()
        )

    def test_receive_drops_unexpected_ids(self, tiny_graph, two_silos, tiny_mask, fast_config):
        config = fast_config.with_overrides(num_silos=2, hidden=4, mode="fedavg")
        clients, _ = setup_federation(tiny_graph, two_silos, tiny_mask, config, 0)
        batch = EmbeddingBatch(np.array([12, 10]), np.ones((2, 4)), round=1, source_silo=1)

        assert clients[0].receive(batch) == 1
        assert list(clients[0].buffer) == [12]


class TestEquivalences:
    """Tests de equivalencia entre modos."""

    def test_lambda_zero_matches_fedavg(self, small_graph, community_partition, small_mask,
                                        fast_config, provider):
        """Test que fedgraph con λ = 0 reproduce FedAvg bit a bit."""
        config = fast_config.with_overrides(rounds=10)
        fedgraph = run_seed(small_graph, community_partition, small_mask,
                            config.with_overrides(lam=0.0), 0, provider)
        plain = run_seed(small_graph, community_partition, small_mask,
                         config.with_overrides(mode="fedavg"), 0)

        np.testing.assert_array_equal(fedgraph.model.flatten(), plain.model.flatten())
        assert [r.f1 for r in fedgraph.rounds] == [r.f1 for r in plain.rounds]
        assert fedgraph.rounds[-1].bytes_embed > 0

    def test_exchange_off_matches_fedavg(self, small_graph, community_partition, small_mask,
                                         fast_config):
        config = fast_config.with_overrides(rounds=10)
        no_exchange = run_seed(small_graph, community_partition, small_mask,
                               config.with_overrides(exchange=False), 0)
        plain = run_seed(small_graph, community_partition, small_mask,
                         config.with_overrides(mode="fedavg"), 0)

        np.testing.assert_array_equal(no_exchange.model.flatten(), plain.model.flatten())
        assert no_exchange.comm.totals()["envelopes"] == 0

    def test_single_silo_matches_centralized(self, small_graph, small_mask, fast_config):
        """Test que FedAvg con K = 1 reproduce el entrenamiento centralizado."""
        single = SiloPartition.from_assignment(
            small_graph, np.zeros(small_graph.num_nodes, dtype=np.int64), 1
        )
        config = fast_config.with_overrides(mode="fedavg", num_silos=1, rounds=10)

        federated = run_seed(small_graph, single, small_mask, config, 0)
        central, history = train_centralized(small_graph, small_mask, config, 0)

        np.testing.assert_array_equal(federated.model.flatten(), central.flatten())
        assert len(history) == config.rounds * config.epochs

    def test_single_silo_local_matches_fedgraph(self, small_graph, small_mask, fast_config,
                                                provider):
        """
        Test local contra fedgraph con λ = 0 cuando K = 1. Con K > 1 no coinciden:
        local nunca promedia y cada silo termina con su propio modelo.
        """
        single = SiloPartition.from_assignment(
            small_graph, np.zeros(small_graph.num_nodes, dtype=np.int64), 1
        )
        config = fast_config.with_overrides(num_silos=1, lam=0.0, rounds=10)

        local = run_seed(small_graph, single, small_mask, config.with_overrides(mode="local"), 0)
        fedgraph = run_seed(small_graph, single, small_mask, config, 0, provider)

        assert local.model is None
        np.testing.assert_array_equal(
            local.clients[0].model.flatten(), fedgraph.model.flatten()
        )

    def test_local_silos_diverge_with_several_silos(self, small_graph, community_partition,
                                                    small_mask, fast_config):
        """Test que con K > 1 el modo local deja un modelo distinto por silo."""
        local = run_seed(small_graph, community_partition, small_mask,
                         fast_config.with_overrides(mode="local", lam=0.0), 0)

        flats = [c.model.flatten() for c in local.clients]
        assert not np.array_equal(flats[0], flats[1])
        assert not np.array_equal(flats[1], flats[2])

    def test_deterministic(self, small_graph, community_partition, small_mask, fast_config,
                           provider):
        a = run_seed(small_graph, community_partition, small_mask, fast_config, 5, provider)
        b = run_seed(small_graph, community_partition, small_mask, fast_config, 5, provider)

        assert without_timing(a.rounds) == without_timing(b.rounds)
        np.testing.assert_array_equal(a.model.flatten(), b.model.flatten())

    def test_parallel_clients_match_sequential(self, small_graph, community_partition,
                                               small_mask, fast_config):
        config = fast_config.with_overrides(mode="fedavg")
        sequential = run_seed(small_graph, community_partition, small_mask, config, 0)
        parallel = run_seed(small_graph, community_partition, small_mask,
                            config.with_overrides(workers=3), 0)

        np.testing.assert_array_equal(sequential.model.flatten(), parallel.model.flatten())


class TestExperiment:
    """Tests para la ejecución completa y sus salidas."""

    def test_zero_rounds(self, small_graph, community_partition, small_mask, fast_config):
        """Test que R = 0 evalúa solo el modelo inicial."""
        config = fast_config.with_overrides(rounds=0, mode="fedavg")
        result = run_seed(small_graph, community_partition, small_mask, config, 0)
        initial = SageModel.initialize(small_graph.feature_dim, config.hidden, 0)

        assert [r.round for r in result.rounds] == [0]
        assert result.comm.rounds == []
        np.testing.assert_array_equal(result.model.flatten(), initial.flatten())

    def test_local_mode_uploads_nothing(self, small_graph, community_partition, small_mask,
                                        fast_config):
        result = run_seed(small_graph, community_partition, small_mask,
                          fast_config.with_overrides(mode="local"), 0)

        assert all(r.bytes_model == 0 and r.envelopes == 0 for r in result.rounds)
        assert len(result.clients) == 3

    def test_metrics_and_summary(self, tmp_path, small_graph, community_partition, small_mask,
                                 fast_config):
        config = fast_config.with_overrides(mode="fedavg", seeds=[0, 1])
        result = run_experiment(config, small_graph, community_partition, small_mask)

        path = write_metrics_csv(result.rounds, tmp_path / "metrics.csv")
        frame = pd.read_csv(path)
        summary = summarize(result)

        assert list(frame.columns) == METRIC_COLUMNS
        assert len(frame) == 2 * (config.rounds + 1)
        assert summary["seeds"] == [0, 1]
        finals = [s.final.f1 for s in result.seeds]
        assert summary["final"]["f1"] == mean_std(finals)

    def test_mean_std(self):
        assert mean_std([1.0, 2.0, 3.0]) == {"mean": 2.0, "std": 1.0}
        assert mean_std([4.0]) == {"mean": 4.0, "std": 0.0}

    def test_evaluate_with_client_models(self, small_graph, community_partition, small_mask,
                                         fast_config):
        config = fast_config.with_overrides(mode="local")
        clients, _ = setup_federation(small_graph, community_partition, small_mask, config, 0)

        scores = evaluate(clients)

        assert set(scores) == {"f1", "precision", "recall"}
        assert all(0.0 <= v <= 1.0 for v in scores.values())

    def test_local_view_drops_cross_edges(self, small_graph, community_partition, small_mask):
        view = local_view(small_graph, community_partition, small_mask)
        assignment = community_partition.assignment

        assert view.num_edges == small_graph.num_edges - community_partition.cross_edges.shape[0]
        assert (assignment[view.src] == assignment[view.dst]).all()


class TestCommReport:
    """Tests para la contabilidad de comunicación."""

    def test_totals_and_table(self, small_graph, community_partition, small_mask, fast_config,
                              provider):
        result = run_seed(small_graph, community_partition, small_mask, fast_config, 0, provider)
        comm = result.comm
        params = result.model.num_parameters

        assert [r.round for r in comm.rounds] == [1, 2]
        assert all(r.model == params * 4 * 3 for r in comm.rounds)
        assert all(r.overhead == r.envelopes * ENVELOPE_OVERHEAD for r in comm.rounds)
        assert comm.per_round()["model"] == params * 4 * 3
        table = comm.format_table()
        assert "PQC ciphertext overhead" in table
        assert "Total per round" in table

    def test_empty_report(self):
        comm = CommReport.from_log("fedavg", [], 10, {})

        assert comm.totals()["model"] == 0
        assert comm.frame().empty

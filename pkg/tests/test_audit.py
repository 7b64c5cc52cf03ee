"""Tests para las auditorías de privacidad."""

import numpy as np
import pytest

from src.audit import (
    AuditError,
    attack_features,
    inversion_attack,
    membership_inference,
    train_shadow,
)
from src.gnn import SageModel
from src.graph import SplitRule, TransactionGraph, generate_synthetic, make_split


def random_label_graph(num_nodes=200, feature_dim=32, seed=0):
    """Grafo disperso con etiquetas aleatorias: solo se aprenden memorizando."""
    rng = np.random.default_rng(seed)
    src = rng.integers(0, num_nodes, size=num_nodes)
    dst = rng.integers(0, num_nodes, size=num_nodes)
    keep = src != dst
    return TransactionGraph(
        num_nodes=num_nodes,
        src=src[keep],
        dst=dst[keep],
        features=rng.normal(size=(num_nodes, feature_dim)),
        labels=rng.integers(0, 2, size=num_nodes),
    )


class TestInversion:
    """Tests para el ataque de inversión de embeddings."""

    def test_identity_embeddings_are_invertible(self):
        """Test que embeddings iguales a las features se reconstruyen casi perfectamente."""
        features = np.random.default_rng(0).normal(size=(1000, 8))

        report = inversion_attack(features.copy(), features, seed=0, hidden=(64,), epochs=300)

        assert report.r2 > 0.8
        assert report.pearson_mean > 0.9
        assert (report.train_rows, report.test_rows) == (700, 300)

    def test_independent_embeddings_leak_nothing(self):
        """Test que embeddings independientes no explican las features."""
        rng = np.random.default_rng(1)
        embeddings = rng.normal(size=(600, 8))
        features = rng.normal(size=(600, 4))

        report = inversion_attack(embeddings, features, seed=0, hidden=(32,), epochs=100)

        assert report.r2 <= 0.05

    def test_constant_feature_is_excluded(self):
        rng = np.random.default_rng(2)
        embeddings = rng.normal(size=(200, 4))
        features = np.column_stack([embeddings[:, 0], np.ones(200)])

        report = inversion_attack(embeddings, features, seed=0, hidden=(16,), epochs=50)

        assert report.excluded_features == [1]

    def test_too_few_rows(self):
        with pytest.raises(AuditError):
            inversion_attack(np.zeros((50, 4)), np.zeros((50, 2)))

    def test_misaligned_rows(self):
        with pytest.raises(AuditError):
            inversion_attack(np.zeros((200, 4)), np.zeros((199, 2)))

    def test_report_to_dict(self):
        features = np.random.default_rng(3).normal(size=(120, 3))
        report = inversion_attack(features, features, seed=0, hidden=(8,), epochs=20)

        data = report.to_dict()

        assert data["hidden_widths"] == [8]
        assert set(data) >= {"mse", "r2", "pearson_mean", "seed"}


class TestMembership:
    """Tests para la inferencia de pertenencia con modelos sombra."""

    def test_attack_features(self, small_graph):
        model = SageModel.initialize(small_graph.feature_dim, hidden=4, seed=0)
        nodes = np.arange(10)

        feats = attack_features(model, small_graph, small_graph.features, nodes)

        assert feats.shape == (10, 2)
        assert (feats[:, 0] >= 0).all()
        assert ((feats[:, 1] >= 0.5) & (feats[:, 1] <= 1.0)).all()

    @pytest.mark.slow
    def test_untrained_model_is_near_chance(self):
        """Test que un modelo sin entrenar no revela pertenencia."""
        graph = generate_synthetic(
            num_communities=4, nodes_per_community=500, p_intra=0.005, p_inter=0.0005,
            feature_dim=16, illicit_fraction=0.2, seed=3,
        )
        mask = make_split(graph, SplitRule.random(0.7, seed=0))
        target = SageModel.initialize(graph.feature_dim, hidden=16, seed=0)

        report = membership_inference(target, graph, mask, seed=0, shadow_steps=50)

        assert abs(report.auc - 0.5) < 0.1
        assert report.members == report.non_members

    @pytest.mark.slow
    def test_memorizing_model_leaks_membership(self):
        """Test que un modelo que memoriza etiquetas aleatorias delata a sus miembros."""
        graph = random_label_graph()
        mask = make_split(graph, SplitRule.random(0.7, seed=0))
        target = train_shadow(
            graph, graph.features, np.flatnonzero(mask.train), hidden=64, steps=400, seed=0,
            weight_decay=0.0,
        )

        report = membership_inference(
            target, graph, mask, seed=0, shadow_steps=400, weight_decay=0.0
        )

        assert report.auc > 0.75

    def test_not_enough_nodes(self, tiny_graph):
        mask = make_split(tiny_graph, SplitRule.random(0.5, seed=0))
        target = SageModel.initialize(2, hidden=2)

        with pytest.raises(AuditError):
            membership_inference(target, tiny_graph, mask)

"""Fixtures compartidas: grafos sintéticos pequeños y particiones."""

import sys

import numpy as np
import pytest
from loguru import logger

from src.config import ExperimentConfig
from src.graph import SplitRule, TransactionGraph, generate_synthetic, make_split
from src.partition import SiloPartition


@pytest.fixture(autouse=True)
def reset_logger():
    """La CLI reemplaza los sinks de loguru; se restauran después de cada test."""
    yield
    logger.remove()
    logger.add(sys.stderr, level="WARNING")


@pytest.fixture
def small_graph() -> TransactionGraph:
    """Tres comunidades de 40 nodos con ilícitos plantados y pasos de tiempo 1..49."""
    return generate_synthetic(
        num_communities=3,
        nodes_per_community=40,
        p_intra=0.15,
        p_inter=0.01,
        feature_dim=8,
        illicit_fraction=0.15,
        seed=7,
    )


@pytest.fixture
def small_mask(small_graph):
    return make_split(small_graph, SplitRule.random(0.7, seed=0))


@pytest.fixture
def community_partition(small_graph) -> SiloPartition:
    """Cada comunidad plantada es un silo."""
    return SiloPartition.from_assignment(small_graph, small_graph.communities, 3)


@pytest.fixture
def tiny_graph() -> TransactionGraph:
    """
    0 -> 1 -> 2 -> 3 con 1 -> 3; etiquetas conocidas en todos los nodos.
    """
    return TransactionGraph(
        num_nodes=4,
        src=np.array([0, 1, 2, 1]),
        dst=np.array([1, 2, 3, 3]),
        features=np.arange(8, dtype=np.float32).reshape(4, 2),
        labels=np.array([0, 1, 0, 1]),
        time_step=np.array([1, 1, 2, 2]),
        node_ids=np.array([10, 11, 12, 13]),
    )


@pytest.fixture
def fast_config() -> ExperimentConfig:
    """Experimento corto con split aleatorio para grafos sintéticos."""
    return ExperimentConfig(
        rounds=2,
        epochs=2,
        hidden=8,
        seeds=[0],
        split="random",
        num_silos=3,
    )

"""
Detección de comunidades Louvain y agrupación de comunidades en K silos.
"""

from dataclasses import dataclass, field
from typing import List

import networkx as nx
import numpy as np
from loguru import logger

from ..graph.model import TransactionGraph
from .silos import PartitionError, SiloPartition


@dataclass(frozen=True, eq=False)
class CommunityLabeling:
    """Comunidad de cada nodo (0 = la más grande) y modularidad por nivel."""

    labels: np.ndarray
    modularity: float
    level_modularity: List[float] = field(default_factory=list)
    resolution: float = 1.0

    @property
    def num_communities(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.num_communities)


def _undirected(graph: TransactionGraph) -> nx.Graph:
    projection = nx.Graph()
    projection.add_nodes_from(range(graph.num_nodes))
    projection.add_edges_from(graph.undirected_edges().tolist())
    return projection


def _relabel(communities, num_nodes: int) -> np.ndarray:
    """Ids de comunidad ordenados por tamaño descendente y luego por nodo mínimo."""
    ordered = sorted((sorted(c) for c in communities), key=lambda c: (-len(c), c[0]))
    labels = np.empty(num_nodes, dtype=np.int64)
    for cid, members in enumerate(ordered):
        labels[members] = cid
    return labels


def louvain(graph: TransactionGraph, seed: int, resolution: float = 1.0) -> CommunityLabeling:
    """
    Louvain sobre la proyección no dirigida del grafo.

    El orden de visita de nodos se deriva de la semilla, por lo que el
    resultado es determinista. La modularidad de cada nivel queda registrada.

    Raises:
        PartitionError: Si el grafo está vacío
    """
    if graph.num_nodes == 0:
        raise PartitionError("No se puede aplicar Louvain a un grafo vacío")

    projection = _undirected(graph)
    if projection.number_of_edges() == 0:
        labels = np.arange(graph.num_nodes, dtype=np.int64)
        logger.info(f"Louvain: grafo sin aristas, {graph.num_nodes} comunidades triviales")
        return CommunityLabeling(labels=labels, modularity=0.0, level_modularity=[0.0],
                                 resolution=resolution)

    levels = list(
        nx.community.louvain_partitions(projection, resolution=resolution, seed=seed)
    )
    level_modularity = [
        float(nx.community.modularity(projection, level, resolution=resolution))
        for level in levels
    ]
    labels = _relabel(levels[-1], graph.num_nodes)
    labeling = CommunityLabeling(
        labels=labels,
        modularity=level_modularity[-1],
        level_modularity=level_modularity,
        resolution=resolution,
    )
    logger.info(
        f"Louvain: {labeling.num_communities} comunidades, "
        f"modularidad={labeling.modularity:.4f} ({len(levels)} niveles)"
    )
    return labeling


def communities_to_silos(
    labels: np.ndarray, num_silos: int, graph: TransactionGraph
) -> SiloPartition:
    """
    Agrupa comunidades en K silos: de mayor a menor, cada comunidad va al
    silo con menos nodos en ese momento (empates al silo de menor índice).
    Ninguna comunidad se divide.

    Raises:
        PartitionError: Si hay menos comunidades que silos
    """
    labels = np.asarray(labels, dtype=np.int64)
    if num_silos < 1:
        raise PartitionError("K debe ser >= 1")
    community_ids, sizes = np.unique(labels, return_counts=True)
    if community_ids.shape[0] < num_silos:
        raise PartitionError(
            f"Hay {community_ids.shape[0]} comunidades y se piden {num_silos} silos"
        )

    order = np.lexsort((community_ids, -sizes))
    silo_of = np.zeros(int(community_ids.max()) + 1, dtype=np.int64)
    load = np.zeros(num_silos, dtype=np.int64)
    for idx in order:
        target = int(np.argmin(load))
        silo_of[community_ids[idx]] = target
        load[target] += sizes[idx]

    assignment = silo_of[labels]
    partition = SiloPartition.from_assignment(graph, assignment, num_silos, method="louvain")
    logger.info(
        f"Comunidades agrupadas en {num_silos} silos: tamaños={partition.silo_sizes()}, "
        f"aristas cruzadas={partition.cross_edge_fraction:.4%}"
    )
    return partition

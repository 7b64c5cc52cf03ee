"""
Generador de grafos sintéticos (modelo de bloques estocásticos) con
comunidades plantadas y etiquetas ilícitas correlacionadas con las features.
"""

import numpy as np
from loguru import logger

from .model import LABEL_ILLICIT, LABEL_LICIT, LABEL_UNKNOWN, GraphError, TransactionGraph


def generate_synthetic(
    num_communities: int = 3,
    nodes_per_community: int = 100,
    p_intra: float = 0.1,
    p_inter: float = 0.005,
    feature_dim: int = 16,
    illicit_fraction: float = 0.1,
    seed: int = 42,
    unlabeled_fraction: float = 0.0,
    feature_shift: float = 1.5,
    max_time_step: int = 49,
) -> TransactionGraph:
    """
    Genera un grafo SBM dirigido y determinista por semilla.

    Cada par no ordenado de nodos recibe una arista con probabilidad p_intra
    (misma comunidad) o p_inter (distinta), orientada al azar. Las etiquetas
    ilícitas se plantan en la primera mitad de las comunidades y desplazan
    sus features en `feature_shift`. Se asignan pasos de tiempo uniformes en
    1..max_time_step para permitir el split temporal.

    Raises:
        GraphError: Si los parámetros violan las precondiciones
    """
    if num_communities < 1 or nodes_per_community < 1 or feature_dim < 1:
        raise GraphError("num_communities, nodes_per_community y feature_dim deben ser >= 1")
    if not (0.0 <= p_inter < p_intra <= 1.0):
        raise GraphError(f"Se requiere 0 <= p_inter < p_intra <= 1 (p_inter={p_inter}, "
                         f"p_intra={p_intra})")
    for name, value in (("illicit_fraction", illicit_fraction),
                        ("unlabeled_fraction", unlabeled_fraction)):
        if not 0.0 <= value <= 1.0:
            raise GraphError(f"{name} debe estar en [0, 1]")

    rng = np.random.default_rng(seed)
    m = nodes_per_community
    n = num_communities * m
    community = np.repeat(np.arange(num_communities, dtype=np.int64), m)

    us, vs = [], []
    for a in range(num_communities):
        for b in range(a, num_communities):
            p = p_intra if a == b else p_inter
            if p == 0.0:
                continue
            hits = rng.random((m, m)) < p
            if a == b:
                hits = np.triu(hits, k=1)
            i, j = np.nonzero(hits)
            us.append(a * m + i)
            vs.append(b * m + j)
    u = np.concatenate(us) if us else np.empty(0, dtype=np.int64)
    v = np.concatenate(vs) if vs else np.empty(0, dtype=np.int64)
    flip = rng.random(u.shape[0]) < 0.5
    src = np.where(flip, v, u)
    dst = np.where(flip, u, v)

    # Etiquetas ilícitas dentro de las comunidades designadas
    designated = np.arange(max(1, num_communities // 2))
    candidates = np.flatnonzero(np.isin(community, designated))
    num_illicit = min(int(round(illicit_fraction * n)), candidates.shape[0])
    labels = np.full(n, LABEL_LICIT, dtype=np.int8)
    illicit = rng.choice(candidates, size=num_illicit, replace=False)
    labels[illicit] = LABEL_ILLICIT

    centers = rng.normal(0.0, 1.0, size=(num_communities, feature_dim))
    features = centers[community] + rng.normal(0.0, 1.0, size=(n, feature_dim))
    features[illicit] += feature_shift

    unlabeled = rng.random(n) < unlabeled_fraction
    labels[unlabeled] = LABEL_UNKNOWN
    time_step = rng.integers(1, max_time_step + 1, size=n)

    graph = TransactionGraph(
        num_nodes=n,
        src=src,
        dst=dst,
        features=features.astype(np.float32),
        labels=labels,
        time_step=time_step,
        communities=community,
        metadata={"dataset": "synthetic", "seed": seed},
    )
    logger.debug(
        f"Grafo sintético: {n} nodos, {graph.num_edges} aristas, "
        f"{num_illicit} ilícitos, semilla {seed}"
    )
    return graph

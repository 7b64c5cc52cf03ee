"""
Máscaras de entrenamiento/prueba y normalización de features.
"""

from dataclasses import dataclass

import numpy as np
from loguru import logger
from sklearn.model_selection import train_test_split
from sklearn.preprocessing import StandardScaler

from .model import (
    LABEL_ILLICIT,
    LABEL_LICIT,
    ROLE_EXCLUDED,
    ROLE_TEST,
    ROLE_TRAIN,
    GraphError,
    NodeMask,
    TransactionGraph,
)

SPLIT_KINDS = ("temporal", "random")


@dataclass(frozen=True)
class SplitRule:
    """
    Regla de derivación del split.

    temporal: entrenamiento con time_step <= train_max_step, prueba el resto.
    random: fracción train_fraction estratificada por clase, con semilla.
    """

    kind: str = "temporal"
    train_max_step: int = 34
    train_fraction: float = 0.7
    seed: int = 0

    @classmethod
    def temporal(cls, train_max_step: int = 34) -> "SplitRule":
        return cls(kind="temporal", train_max_step=train_max_step)

    @classmethod
    def random(cls, train_fraction: float = 0.7, seed: int = 0) -> "SplitRule":
        return cls(kind="random", train_fraction=train_fraction, seed=seed)


def make_split(graph: TransactionGraph, rule: SplitRule) -> NodeMask:
    """
    Deriva la máscara de roles. Los nodos sin etiqueta quedan siempre excluidos.

    Raises:
        GraphError: Sin nodos etiquetados, regla desconocida o pasos de tiempo ausentes
    """
    labeled = graph.labeled_mask
    if not labeled.any():
        raise GraphError("El grafo no tiene nodos etiquetados")

    role = np.full(graph.num_nodes, ROLE_EXCLUDED, dtype=np.int8)

    if rule.kind == "temporal":
        if graph.time_step is None:
            raise GraphError("El split temporal requiere time_step y el grafo no lo tiene")
        early = graph.time_step <= rule.train_max_step
        if not (labeled & early).any() or not (labeled & ~early).any():
            raise GraphError(
                f"La regla temporal (train <= {rule.train_max_step}) referencia pasos de "
                f"tiempo sin nodos etiquetados"
            )
        role[labeled & early] = ROLE_TRAIN
        role[labeled & ~early] = ROLE_TEST
        params = {"train_max_step": rule.train_max_step}

    elif rule.kind == "random":
        if not 0.0 < rule.train_fraction < 1.0:
            raise GraphError("train_fraction debe estar en (0, 1)")
        candidates = np.flatnonzero(labeled)
        if candidates.shape[0] < 2:
            raise GraphError("Se necesitan al menos 2 nodos etiquetados para un split aleatorio")
        y = graph.labels[candidates]
        per_class = [np.count_nonzero(y == c) for c in (LABEL_LICIT, LABEL_ILLICIT)]
        stratify = y if min(per_class) >= 2 else None
        train_idx, test_idx = train_test_split(
            candidates,
            train_size=rule.train_fraction,
            random_state=rule.seed,
            stratify=stratify,
        )
        role[train_idx] = ROLE_TRAIN
        role[test_idx] = ROLE_TEST
        params = {"train_fraction": rule.train_fraction, "seed": rule.seed}

    else:
        raise GraphError(f"Regla de split desconocida: {rule.kind}. Opciones: {SPLIT_KINDS}")

    mask = NodeMask(role=role, rule=rule.kind, params=params)
    logger.debug(f"Split {rule.kind}: {mask.counts()}")
    return mask


def normalize_features(features: np.ndarray, train_mask: np.ndarray) -> np.ndarray:
    """
    Estandariza cada columna con media y desviación de las filas de
    entrenamiento. Sin filas de entrenamiento se usan todas las filas.
    """
    features = np.asarray(features, dtype=np.float64)
    train_mask = np.asarray(train_mask, dtype=bool)
    if features.shape[0] == 0:
        return features.astype(np.float32)
    fit_rows = features[train_mask] if train_mask.any() else features
    scaler = StandardScaler().fit(fit_rows)
    return scaler.transform(features).astype(np.float32)

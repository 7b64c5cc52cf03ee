"""
Inferencia de pertenencia con modelos sombra.

El atacante entrena modelos sombra de la misma arquitectura sobre nodos
etiquetados disjuntos del conjunto de evaluación, y un clasificador logístico
sobre (pérdida, confianza máxima) que luego aplica al modelo objetivo.
"""

from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np
from loguru import logger
from sklearn.linear_model import LogisticRegression
from sklearn.metrics import roc_auc_score
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler

from ..gnn.losses import class_weights, log_softmax, softmax
from ..gnn.model import SageModel
from ..gnn.optim import AdamState
from ..gnn.trainer import train_step
from ..graph.model import NodeMask, TransactionGraph
from .inversion import AuditError

ATTACK_FEATURES = ("loss", "max_softmax")
MIN_EVAL_NODES = 10


@dataclass(frozen=True)
class MiaReport:
    auc: float
    attack_features: Tuple[str, ...] = ATTACK_FEATURES
    shadow_models: int = 1
    shadow_steps: int = 0
    members: int = 0
    non_members: int = 0
    seed: int = 0

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["attack_features"] = list(self.attack_features)
        return data


def attack_features(
    model: SageModel, graph: TransactionGraph, features: np.ndarray, nodes: np.ndarray
) -> np.ndarray:
    """Por nodo: entropía cruzada con su etiqueta y probabilidad máxima."""
    _, logits, _ = model.forward(graph, features)
    nodes = np.asarray(nodes, dtype=np.int64)
    y = graph.labels[nodes].astype(np.int64)
    loss = -log_softmax(logits[nodes])[np.arange(nodes.shape[0]), y]
    confidence = softmax(logits[nodes]).max(axis=1)
    return np.column_stack([loss, confidence])


def train_shadow(
    graph: TransactionGraph,
    features: np.ndarray,
    members: np.ndarray,
    hidden: int,
    steps: int,
    seed: int,
    lr: float = 0.01,
    weight_decay: float = 5e-4,
) -> SageModel:
    """Modelo sombra entrenado solo con `members` como nodos de entrenamiento."""
    model = SageModel.initialize(features.shape[1], hidden, seed)
    state = AdamState.for_model(model, lr=lr, weight_decay=weight_decay)
    train_mask = np.zeros(graph.num_nodes, dtype=bool)
    train_mask[members] = True
    weights = class_weights(graph.labels[train_mask])
    for _ in range(steps):
        train_step(model, state, graph, features, graph.labels, train_mask, class_weight=weights)
    return model


def membership_inference(
    target: SageModel,
    graph: TransactionGraph,
    mask: NodeMask,
    features: Optional[np.ndarray] = None,
    seed: int = 0,
    shadow_models: int = 1,
    shadow_steps: int = 150,
    lr: float = 0.01,
    weight_decay: float = 5e-4,
) -> MiaReport:
    """
    Evalúa la fuga de pertenencia del modelo objetivo.

    Miembros: nodos de entrenamiento; no miembros: nodos etiquetados de
    prueba. Se reserva un conjunto balanceado para evaluar y el resto de
    nodos etiquetados alimenta a los modelos sombra.

    Raises:
        AuditError: Si no hay nodos suficientes para una evaluación balanceada
    """
    features = graph.features if features is None else np.asarray(features)
    rng = np.random.default_rng(seed)
    members = rng.permutation(np.flatnonzero(mask.train))
    outsiders = rng.permutation(np.flatnonzero(mask.test))

    m = min(members.shape[0], outsiders.shape[0]) // 2
    if m < MIN_EVAL_NODES:
        raise AuditError(
            f"Nodos insuficientes para una evaluación balanceada: {members.shape[0]} miembros, "
            f"{outsiders.shape[0]} no miembros"
        )
    eval_in, eval_out = members[:m], outsiders[:m]
    pool = rng.permutation(np.concatenate([members[m:], outsiders[m:]]))
    half = pool.shape[0] // 2
    if half < MIN_EVAL_NODES:
        raise AuditError("Nodos insuficientes para entrenar los modelos sombra")

    shadow_x, shadow_y = [], []
    for s in range(shadow_models):
        order = np.random.default_rng(seed + 1 + s).permutation(pool)
        shadow_in, shadow_out = order[:half], order[half:2 * half]
        shadow = train_shadow(
            graph, features, shadow_in, target.hidden, shadow_steps, seed + 1 + s, lr, weight_decay
        )
        shadow_x += [attack_features(shadow, graph, features, shadow_in),
                     attack_features(shadow, graph, features, shadow_out)]
        shadow_y += [np.ones(half), np.zeros(half)]
        logger.debug(f"Modelo sombra {s + 1}/{shadow_models} entrenado con {half} nodos")

    attacker = make_pipeline(StandardScaler(), LogisticRegression(max_iter=1000))
    attacker.fit(np.vstack(shadow_x), np.concatenate(shadow_y))

    x_eval = np.vstack([attack_features(target, graph, features, eval_in),
                        attack_features(target, graph, features, eval_out)])
    y_eval = np.concatenate([np.ones(m), np.zeros(m)])
    auc = float(roc_auc_score(y_eval, attacker.predict_proba(x_eval)[:, 1]))

    report = MiaReport(
        auc=auc,
        shadow_models=shadow_models,
        shadow_steps=shadow_steps,
        members=m,
        non_members=m,
        seed=seed,
    )
    logger.info(f"Inferencia de pertenencia: AUC={auc:.4f} ({m} + {m} nodos)")
    return report

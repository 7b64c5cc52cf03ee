"""
Paso de entrenamiento de grafo completo: forward, pérdidas, backward y Adam.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..graph.model import TransactionGraph
from .losses import classification_loss, cosine_alignment, total_loss
from .model import NUM_CLASSES, SageModel
from .optim import AdamState, adam_step


@dataclass(frozen=True)
class StepLosses:
    classify: float
    boundary: float
    total: float


def train_step(
    model: SageModel,
    state: AdamState,
    graph: TransactionGraph,
    features: np.ndarray,
    labels: np.ndarray,
    train_mask: np.ndarray,
    class_weight: Optional[np.ndarray] = None,
    lam: float = 0.0,
    align_rows: Optional[np.ndarray] = None,
    foreign_vectors: Optional[np.ndarray] = None,
) -> StepLosses:
    """
    Un paso de gradiente sobre L_total = L_cls + λ · L_bnd.

    Sin nodos de entrenamiento la pérdida de clasificación es 0. La
    alineación empareja la fila `align_rows[i]` del silo con
    `foreign_vectors[i]`; con λ = 0 no modifica los gradientes.
    """
    embeddings, logits, cache = model.forward(graph, features)

    if np.any(train_mask):
        loss_cls, d_logits = classification_loss(logits, labels, train_mask, class_weight)
    else:
        loss_cls, d_logits = 0.0, np.zeros((graph.num_nodes, NUM_CLASSES))

    loss_bnd = 0.0
    d_embeddings = None
    if align_rows is not None and len(align_rows):
        loss_bnd, d_align = cosine_alignment(embeddings, foreign_vectors, align_rows)
        if lam > 0:
            d_embeddings = lam * d_align

    grads = model.backward(cache, d_logits, d_embeddings)
    adam_step(model, grads, state)
    return StepLosses(loss_cls, loss_bnd, total_loss(loss_cls, loss_bnd, lam))

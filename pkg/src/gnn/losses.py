"""
Pérdidas de entrenamiento: clasificación ponderada, alineación de frontera y total.
Cada pérdida devuelve el escalar y su gradiente analítico.
"""

from typing import Optional, Tuple

import numpy as np
import pandas as pd
from sklearn.utils.class_weight import compute_class_weight

from ..graph.model import TransactionGraph
from .embeddings import EmbeddingBatch
from .model import NUM_CLASSES, ModelError, SageModel


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def predict_proba(
    model: SageModel, graph: TransactionGraph, features: Optional[np.ndarray] = None
) -> np.ndarray:
    _, logits, _ = model.forward(graph, features)
    return softmax(logits)


def class_weights(train_labels: np.ndarray) -> np.ndarray:
    """
    Pesos por frecuencia inversa ("balanced") calculados sobre el split de
    entrenamiento. Una clase ausente conserva peso 1.
    """
    y = np.asarray(train_labels, dtype=np.int64)
    weights = np.ones(NUM_CLASSES, dtype=np.float64)
    present = np.unique(y[y >= 0])
    if present.size:
        weights[present] = compute_class_weight("balanced", classes=present, y=y[y >= 0])
    return weights


def classification_loss(
    logits: np.ndarray,
    labels: np.ndarray,
    mask: np.ndarray,
    class_weight: Optional[np.ndarray] = None,
) -> Tuple[float, np.ndarray]:
    """
    Entropía cruzada ponderada por clase, promediada sobre los nodos de la máscara.

    Returns:
        (pérdida, dL/dlogits con la misma forma que logits)

    Raises:
        ModelError: Máscara vacía o con nodos sin etiqueta
    """
    logits = np.asarray(logits, dtype=np.float64)
    idx = np.flatnonzero(np.asarray(mask, dtype=bool))
    if idx.size == 0:
        raise ModelError("La máscara de clasificación está vacía")
    y = np.asarray(labels)[idx].astype(np.int64)
    if (y < 0).any():
        raise ModelError("La máscara incluye nodos sin etiqueta")

    w = np.ones(idx.size) if class_weight is None else np.asarray(class_weight)[y]
    m = idx.size
    rows = np.arange(m)
    selected = logits[idx]
    loss = float(-(w * log_softmax(selected)[rows, y]).sum() / m)

    probs = softmax(selected)
    probs[rows, y] -= 1.0
    grad = np.zeros_like(logits)
    grad[idx] = probs * (w / m)[:, None]
    return loss, grad


def cosine_alignment(
    embeddings: np.ndarray, foreign: np.ndarray, rows: np.ndarray
) -> Tuple[float, np.ndarray]:
    """
    (1/m) Σ_i (1 − cos(embeddings[rows[i]], foreign[i])).

    Los vectores foráneos son constantes; el gradiente solo fluye hacia
    `embeddings`. Un vector de norma cero aporta coseno 0 y gradiente 0.
    Sin pares devuelve (0, gradiente cero).
    """
    embeddings = np.asarray(embeddings, dtype=np.float64)
    grad = np.zeros_like(embeddings)
    rows = np.asarray(rows, dtype=np.int64)
    m = rows.shape[0]
    if m == 0:
        return 0.0, grad
    foreign = np.asarray(foreign, dtype=np.float64)
    if foreign.shape != (m, embeddings.shape[1]):
        raise ModelError(f"Embeddings foráneos de forma {foreign.shape}, se esperaba ({m}, "
                         f"{embeddings.shape[1]})")

    local = embeddings[rows]
    norm_l = np.linalg.norm(local, axis=1)
    norm_f = np.linalg.norm(foreign, axis=1)
    valid = (norm_l > 0) & (norm_f > 0)
    denom = np.where(valid, norm_l * norm_f, 1.0)
    cos = np.where(valid, (local * foreign).sum(axis=1) / denom, 0.0)
    loss = float((1.0 - cos).mean())

    safe_l = np.where(valid, norm_l, 1.0)
    d_local = -(foreign / denom[:, None] - cos[:, None] * local / (safe_l ** 2)[:, None]) / m
    d_local[~valid] = 0.0
    np.add.at(grad, rows, d_local)
    return loss, grad


def boundary_alignment_loss(
    local: EmbeddingBatch,
    foreign: EmbeddingBatch,
    links: Optional[np.ndarray] = None,
) -> Tuple[float, np.ndarray]:
    """
    Pérdida de alineación entre embeddings locales y foráneos emparejados por id.

    Args:
        local: Embeddings del silo
        foreign: Embeddings recibidos de otros silos
        links: Pares (id local, id foráneo); por defecto se empareja el mismo id

    Returns:
        (pérdida, gradiente respecto de local.vectors)
    """
    local_ids = local.node_ids
    foreign_ids = foreign.node_ids
    if links is None:
        _, li, fi = np.intersect1d(local_ids, foreign_ids, return_indices=True)
    else:
        links = np.asarray(links, dtype=np.int64).reshape(-1, 2)
        local_pos = _positions(local_ids, links[:, 0])
        foreign_pos = _positions(foreign_ids, links[:, 1])
        keep = (local_pos >= 0) & (foreign_pos >= 0)
        li, fi = local_pos[keep], foreign_pos[keep]
    return cosine_alignment(local.vectors, foreign.vectors[fi], li)


def _positions(ids: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Posición de cada id de `query` en `ids` (-1 si no está)."""
    return pd.Index(ids).get_indexer(query)


def total_loss(classify: float, boundary: float, lam: float) -> float:
    """L_total = L_cls + λ · L_bnd."""
    if lam < 0:
        raise ModelError("lambda debe ser >= 0")
    return classify + lam * boundary

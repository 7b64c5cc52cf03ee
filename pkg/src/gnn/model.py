"""
Encoder GraphSAGE de 2 capas con agregación por media y cabeza lineal.

Capa l: H' = act([H, P·H] · W + b), donde P es el operador de media sobre la
unión de vecinos de entrada y salida. ReLU después de la capa 1, identidad
después de la capa 2. Los embeddings son la salida de la capa 2 (antes de la cabeza).
"""

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from loguru import logger

from ..graph.model import TransactionGraph

PARAM_NAMES = (
    "layer1.weight",
    "layer1.bias",
    "layer2.weight",
    "layer2.bias",
    "head.weight",
    "head.bias",
)

NUM_CLASSES = 2


class ModelError(Exception):
    """Error en el modelo GNN."""
    pass


@dataclass
class ForwardCache:
    """Activaciones intermedias necesarias para el backward."""

    graph: TransactionGraph
    concat1: np.ndarray
    pre1: np.ndarray
    concat2: np.ndarray
    embeddings: np.ndarray
    logits: np.ndarray


class SageModel:
    """
    Parámetros θ del encoder y la cabeza de clasificación.

    Los parámetros se mantienen en float64; flatten/unflatten son exactos.
    """

    def __init__(
        self, in_dim: int, hidden: int = 128, params: Optional[Dict[str, np.ndarray]] = None
    ):
        if in_dim < 1 or hidden < 1:
            raise ModelError("in_dim y hidden deben ser >= 1")
        self.in_dim = int(in_dim)
        self.hidden = int(hidden)
        shapes = self.shapes()
        if params is None:
            params = {name: np.zeros(shape) for name, shape in shapes.items()}
        for name, shape in shapes.items():
            if name not in params:
                raise ModelError(f"Falta el parámetro {name}")
            if tuple(np.shape(params[name])) != shape:
                raise ModelError(
                    f"Forma inválida para {name}: {np.shape(params[name])}, se esperaba {shape}"
                )
        self.params = {name: np.array(params[name], dtype=np.float64) for name in PARAM_NAMES}

    @classmethod
    def initialize(cls, in_dim: int, hidden: int = 128, seed: int = 0) -> "SageModel":
        """Inicialización uniforme Glorot para pesos y ceros para sesgos."""
        rng = np.random.default_rng(seed)
        model = cls(in_dim, hidden)
        for name, shape in model.shapes().items():
            if name.endswith(".weight"):
                limit = np.sqrt(6.0 / (shape[0] + shape[1]))
                model.params[name] = rng.uniform(-limit, limit, size=shape)
        logger.debug(
            f"Modelo inicializado: in_dim={in_dim}, hidden={hidden}, "
            f"parámetros={model.num_parameters}, semilla={seed}"
        )
        return model

    def shapes(self) -> Dict[str, Tuple[int, ...]]:
        d, h = self.in_dim, self.hidden
        return {
            "layer1.weight": (2 * d, h),
            "layer1.bias": (h,),
            "layer2.weight": (2 * h, h),
            "layer2.bias": (h,),
            "head.weight": (h, NUM_CLASSES),
            "head.bias": (NUM_CLASSES,),
        }

    @property
    def num_parameters(self) -> int:
        return int(sum(p.size for p in self.params.values()))

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.params[name].ravel() for name in PARAM_NAMES])

    def unflatten(self, vector: np.ndarray) -> "SageModel":
        """Nuevo modelo con la misma arquitectura y los parámetros de `vector`."""
        vector = np.asarray(vector, dtype=np.float64)
        if vector.shape != (self.num_parameters,):
            raise ModelError(
                f"Vector de {vector.shape} parámetros, se esperaban {self.num_parameters}"
            )
        params, offset = {}, 0
        for name, shape in self.shapes().items():
            size = int(np.prod(shape))
            params[name] = vector[offset:offset + size].reshape(shape)
            offset += size
        return SageModel(self.in_dim, self.hidden, params)

    def copy(self) -> "SageModel":
        return SageModel(self.in_dim, self.hidden, self.params)

    def same_architecture(self, other: "SageModel") -> bool:
        return self.in_dim == other.in_dim and self.hidden == other.hidden

    # ------------------------------------------------------------------
    # Forward / backward
    # ------------------------------------------------------------------

    def forward(
        self, graph: TransactionGraph, features: Optional[np.ndarray] = None
    ) -> Tuple[np.ndarray, np.ndarray, ForwardCache]:
        """
        Propagación completa sobre el (sub)grafo.

        Returns:
            (embeddings n×h, logits n×2, caché para backward)
        """
        x = graph.features if features is None else features
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (graph.num_nodes, self.in_dim):
            raise ModelError(
                f"Features de forma {x.shape}, se esperaba ({graph.num_nodes}, {self.in_dim})"
            )
        p = self.params
        agg = graph.mean_aggregator

        concat1 = np.hstack([x, agg @ x])
        pre1 = concat1 @ p["layer1.weight"] + p["layer1.bias"]
        hidden1 = np.maximum(pre1, 0.0)
        concat2 = np.hstack([hidden1, agg @ hidden1])
        embeddings = concat2 @ p["layer2.weight"] + p["layer2.bias"]
        logits = embeddings @ p["head.weight"] + p["head.bias"]

        cache = ForwardCache(
            graph=graph,
            concat1=concat1,
            pre1=pre1,
            concat2=concat2,
            embeddings=embeddings,
            logits=logits,
        )
        return embeddings, logits, cache

    def backward(
        self,
        cache: Optional[ForwardCache],
        d_logits: np.ndarray,
        d_embeddings: Optional[np.ndarray] = None,
    ) -> Dict[str, np.ndarray]:
        """
        Gradientes exactos respecto de cada parámetro.

        Args:
            cache: Caché del forward correspondiente
            d_logits: dL/dlogits (n×2)
            d_embeddings: Gradiente adicional sobre los embeddings (n×h), p. ej. alineación

        Raises:
            ModelError: Si falta la caché o las formas no coinciden
        """
        if cache is None:
            raise ModelError("backward requiere la caché de un forward previo")
        n, h = cache.embeddings.shape
        d_logits = np.asarray(d_logits, dtype=np.float64)
        if d_logits.shape != (n, NUM_CLASSES):
            raise ModelError(f"d_logits de forma {d_logits.shape}, se esperaba ({n}, 2)")
        p = self.params
        grads: Dict[str, np.ndarray] = {}

        grads["head.weight"] = cache.embeddings.T @ d_logits
        grads["head.bias"] = d_logits.sum(axis=0)
        d_emb = d_logits @ p["head.weight"].T
        if d_embeddings is not None:
            if d_embeddings.shape != (n, h):
                raise ModelError(f"d_embeddings de forma {d_embeddings.shape}")
            d_emb = d_emb + d_embeddings

        grads["layer2.weight"] = cache.concat2.T @ d_emb
        grads["layer2.bias"] = d_emb.sum(axis=0)
        d_concat2 = d_emb @ p["layer2.weight"].T
        d_hidden1 = d_concat2[:, :h] + cache.graph.mean_aggregator_t @ d_concat2[:, h:]
        d_pre1 = d_hidden1 * (cache.pre1 > 0)

        grads["layer1.weight"] = cache.concat1.T @ d_pre1
        grads["layer1.bias"] = d_pre1.sum(axis=0)
        return {name: grads[name] for name in PARAM_NAMES}


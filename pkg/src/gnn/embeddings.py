"""
Lotes de embeddings de frontera y su serialización binaria.

Formato: count u32 | count × (id u64, h × float32), todo little-endian.
"""

import struct
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from ..graph.model import TransactionGraph
from .model import ModelError, SageModel

COUNT_FIELD = struct.Struct("<I")
ID_BYTES = 8
FLOAT_BYTES = 4


def record_dtype(dim: int) -> np.dtype:
    return np.dtype([("id", "<u8"), ("vec", "<f4", (dim,))])


def payload_size(rows: int, dim: int) -> int:
    """Bytes del lote serializado."""
    return COUNT_FIELD.size + rows * (ID_BYTES + dim * FLOAT_BYTES)


@dataclass(frozen=True, eq=False)
class EmbeddingBatch:
    """Embeddings (float32) de nodos frontera de un silo en una ronda."""

    node_ids: np.ndarray
    vectors: np.ndarray
    round: int = 0
    source_silo: int = 0

    def __post_init__(self):
        ids = np.asarray(self.node_ids, dtype=np.int64).ravel()
        vectors = np.asarray(self.vectors, dtype=np.float32)
        if vectors.ndim != 2:
            raise ModelError("vectors debe ser una matriz 2D")
        if vectors.shape[0] != ids.shape[0]:
            raise ModelError(
                f"El lote tiene {ids.shape[0]} ids y {vectors.shape[0]} vectores"
            )
        if ids.size and ids.min() < 0:
            raise ModelError("Los ids de nodo deben ser no negativos")
        object.__setattr__(self, "node_ids", ids)
        object.__setattr__(self, "vectors", np.ascontiguousarray(vectors))

    @classmethod
    def empty(cls, dim: int, round: int = 0, source_silo: int = 0) -> "EmbeddingBatch":
        return cls(np.empty(0, dtype=np.int64), np.empty((0, dim), dtype=np.float32),
                   round, source_silo)

    def __len__(self) -> int:
        return int(self.node_ids.shape[0])

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    @property
    def payload_size(self) -> int:
        return payload_size(len(self), self.dim)

    def select(self, ids: np.ndarray) -> "EmbeddingBatch":
        """Sub-lote con los ids pedidos, en ese orden."""
        positions = pd.Index(self.node_ids).get_indexer(np.asarray(ids, dtype=np.int64))
        if (positions < 0).any():
            raise ModelError("Id ausente del lote")
        return EmbeddingBatch(self.node_ids[positions], self.vectors[positions],
                              self.round, self.source_silo)

    def to_bytes(self) -> bytes:
        records = np.empty(len(self), dtype=record_dtype(self.dim))
        records["id"] = self.node_ids
        records["vec"] = self.vectors
        return COUNT_FIELD.pack(len(self)) + records.tobytes()

    @classmethod
    def from_bytes(
        cls, data: bytes, dim: Optional[int] = None, round: int = 0, source_silo: int = 0
    ) -> "EmbeddingBatch":
        """
        Deserializa un lote. El ancho h se infiere de la longitud salvo en
        lotes vacíos, donde se usa `dim` (0 si no se indica).

        Raises:
            ModelError: Si la longitud no es consistente con el formato
        """
        if len(data) < COUNT_FIELD.size:
            raise ModelError("Payload de embeddings truncado")
        (count,) = COUNT_FIELD.unpack_from(data)
        body = len(data) - COUNT_FIELD.size
        if count == 0:
            if body:
                raise ModelError("Lote vacío con bytes sobrantes")
            return cls.empty(dim or 0, round, source_silo)

        record = body // count
        if record * count != body or (record - ID_BYTES) % FLOAT_BYTES or record <= ID_BYTES:
            raise ModelError(f"Longitud de payload inválida para {count} registros")
        inferred = (record - ID_BYTES) // FLOAT_BYTES
        if dim is not None and dim != inferred:
            raise ModelError(f"Ancho de embedding {inferred}, se esperaba {dim}")

        records = np.frombuffer(data, dtype=record_dtype(inferred), offset=COUNT_FIELD.size)
        return cls(records["id"].astype(np.int64), records["vec"].copy(), round, source_silo)


def extract_boundary_embeddings(
    model: SageModel,
    graph: TransactionGraph,
    boundary_ids: np.ndarray,
    features: Optional[np.ndarray] = None,
    round: int = 0,
    source_silo: int = 0,
    embeddings: Optional[np.ndarray] = None,
) -> EmbeddingBatch:
    """
    Embeddings de capa 2 para los ids pedidos (ids externos del subgrafo),
    en el orden de la petición.

    Args:
        embeddings: Salida de un forward ya calculado sobre `graph`, si existe

    Raises:
        ModelError: Si algún id no pertenece al subgrafo
    """
    ids = np.asarray(boundary_ids, dtype=np.int64).ravel()
    if ids.size == 0:
        return EmbeddingBatch.empty(model.hidden, round, source_silo)

    positions = pd.Index(graph.node_ids).get_indexer(ids)
    if (positions < 0).any():
        unknown = ids[positions < 0][0]
        raise ModelError(f"El nodo {unknown} no pertenece al subgrafo del silo {source_silo}")

    if embeddings is None:
        embeddings, _, _ = model.forward(graph, features)
    return EmbeddingBatch(ids, embeddings[positions], round, source_silo)

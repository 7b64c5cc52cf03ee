"""
Modelo de datos del grafo de transacciones.
Adyacencia dirigida en formato CSR con acceso a vecinos de salida y de entrada.
"""

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Dict, Optional, Tuple

import numpy as np
import scipy.sparse as sp

LABEL_LICIT = 0
LABEL_ILLICIT = 1
LABEL_UNKNOWN = -1

ROLE_EXCLUDED = 0
ROLE_TRAIN = 1
ROLE_TEST = 2


class GraphError(Exception):
    """Error en la construcción o el uso de un grafo."""
    pass


class DataFormatError(GraphError):
    """Fila mal formada en un archivo de entrada."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        location = path or ""
        if line is not None:
            location = f"{location}:{line}" if location else f"línea {line}"
        super().__init__(f"{location}: {message}" if location else message)
        self.path = path
        self.line = line


class ReferentialIntegrityError(GraphError):
    """Una arista o etiqueta referencia un txId que no existe en las features."""
    pass


def _build_csr(
    rows: np.ndarray, cols: np.ndarray, num_nodes: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Construye (indptr, indices) conservando aristas repetidas y el orden de entrada."""
    order = np.argsort(rows, kind="stable")
    indices = cols[order]
    counts = np.bincount(rows, minlength=num_nodes)
    indptr = np.zeros(num_nodes + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, indices


def _readonly(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class TransactionGraph:
    """
    Grafo dirigido de transacciones.

    Inmutable después de construido: los arreglos se marcan como solo lectura
    y las estructuras derivadas (CSR, operador de agregación) se calculan una
    sola vez. Puede compartirse entre hilos.

    Etiquetas: 1 ilícita, 0 lícita, -1 desconocida.
    """

    num_nodes: int
    src: np.ndarray
    dst: np.ndarray
    features: np.ndarray
    labels: np.ndarray
    time_step: Optional[np.ndarray] = None
    node_ids: Optional[np.ndarray] = None
    communities: Optional[np.ndarray] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        n = int(self.num_nodes)
        if n < 0:
            raise GraphError("num_nodes no puede ser negativo")

        src = np.ascontiguousarray(self.src, dtype=np.int64).ravel()
        dst = np.ascontiguousarray(self.dst, dtype=np.int64).ravel()
        if src.shape != dst.shape:
            raise GraphError("src y dst deben tener la misma longitud")
        if src.size and (src.min() < 0 or dst.min() < 0 or src.max() >= n or dst.max() >= n):
            raise GraphError(f"Extremo de arista fuera de rango (num_nodes={n})")

        features = np.asarray(self.features, dtype=np.float32)
        if features.ndim == 1 and n == features.shape[0]:
            features = features.reshape(n, 1)
        if features.ndim != 2 or features.shape[0] != n:
            raise GraphError(
                f"La matriz de features debe tener {n} filas, tiene forma {features.shape}"
            )

        labels = np.asarray(self.labels, dtype=np.int8).ravel()
        if labels.shape[0] != n:
            raise GraphError(f"Se esperaban {n} etiquetas, hay {labels.shape[0]}")
        if labels.size and not np.isin(labels, (LABEL_UNKNOWN, LABEL_LICIT, LABEL_ILLICIT)).all():
            raise GraphError("Etiquetas fuera de {-1, 0, 1}")

        time_step = None
        if self.time_step is not None:
            time_step = np.asarray(self.time_step, dtype=np.int64).ravel()
            if time_step.shape[0] != n:
                raise GraphError("time_step debe tener una entrada por nodo")

        node_ids = (
            np.arange(n, dtype=np.int64)
            if self.node_ids is None
            else np.asarray(self.node_ids, dtype=np.int64).ravel()
        )
        if node_ids.shape[0] != n:
            raise GraphError("node_ids debe tener una entrada por nodo")

        communities = None
        if self.communities is not None:
            communities = np.asarray(self.communities, dtype=np.int64).ravel()
            if communities.shape[0] != n:
                raise GraphError("communities debe tener una entrada por nodo")

        object.__setattr__(self, "num_nodes", n)
        object.__setattr__(self, "src", _readonly(src))
        object.__setattr__(self, "dst", _readonly(dst))
        object.__setattr__(self, "features", _readonly(np.ascontiguousarray(features)))
        object.__setattr__(self, "labels", _readonly(labels))
        object.__setattr__(self, "time_step", None if time_step is None else _readonly(time_step))
        object.__setattr__(self, "node_ids", _readonly(node_ids))
        object.__setattr__(
            self, "communities", None if communities is None else _readonly(communities)
        )

    # ------------------------------------------------------------------
    # Tamaños y conteos
    # ------------------------------------------------------------------

    @property
    def num_edges(self) -> int:
        return int(self.src.shape[0])

    @property
    def feature_dim(self) -> int:
        return int(self.features.shape[1])

    @property
    def labeled_mask(self) -> np.ndarray:
        return self.labels != LABEL_UNKNOWN

    def label_counts(self) -> Dict[str, int]:
        """Conteo de nodos ilícitos, lícitos y sin etiqueta."""
        return {
            "illicit": int(np.count_nonzero(self.labels == LABEL_ILLICIT)),
            "licit": int(np.count_nonzero(self.labels == LABEL_LICIT)),
            "unknown": int(np.count_nonzero(self.labels == LABEL_UNKNOWN)),
        }

    # ------------------------------------------------------------------
    # CSR
    # ------------------------------------------------------------------

    @cached_property
    def _out_csr(self) -> Tuple[np.ndarray, np.ndarray]:
        indptr, indices = _build_csr(self.src, self.dst, self.num_nodes)
        return _readonly(indptr), _readonly(indices)

    @cached_property
    def _in_csr(self) -> Tuple[np.ndarray, np.ndarray]:
        indptr, indices = _build_csr(self.dst, self.src, self.num_nodes)
        return _readonly(indptr), _readonly(indices)

    @property
    def out_indptr(self) -> np.ndarray:
        return self._out_csr[0]

    @property
    def out_indices(self) -> np.ndarray:
        return self._out_csr[1]

    @property
    def in_indptr(self) -> np.ndarray:
        return self._in_csr[0]

    @property
    def in_indices(self) -> np.ndarray:
        return self._in_csr[1]

    def out_neighbors(self, node: int) -> np.ndarray:
        indptr, indices = self._out_csr
        return indices[indptr[node]:indptr[node + 1]]

    def in_neighbors(self, node: int) -> np.ndarray:
        indptr, indices = self._in_csr
        return indices[indptr[node]:indptr[node + 1]]

    def edge_list(self) -> Tuple[np.ndarray, np.ndarray]:
        """Reconstruye la lista de aristas a partir del CSR de salida."""
        indptr, indices = self._out_csr
        src = np.repeat(np.arange(self.num_nodes, dtype=np.int64), np.diff(indptr))
        return src, indices.copy()

    def adjacency(self) -> sp.csr_matrix:
        """Matriz de adyacencia dirigida (aristas repetidas se conservan)."""
        indptr, indices = self._out_csr
        data = np.ones(indices.shape[0], dtype=np.float64)
        return sp.csr_matrix((data, indices, indptr), shape=(self.num_nodes, self.num_nodes))

    @cached_property
    def mean_aggregator(self) -> sp.csr_matrix:
        """
        Operador de agregación por media sobre la unión de vecinos de entrada
        y de salida. Las filas de nodos aislados quedan en cero.
        """
        n = self.num_nodes
        rows = np.concatenate([self.src, self.dst])
        cols = np.concatenate([self.dst, self.src])
        union = sp.csr_matrix(
            (np.ones(rows.shape[0], dtype=np.float64), (rows, cols)), shape=(n, n)
        )
        union.sum_duplicates()
        union.data[:] = 1.0
        degree = np.diff(union.indptr).astype(np.float64)
        inv = np.divide(1.0, degree, out=np.zeros_like(degree), where=degree > 0)
        return sp.csr_matrix(sp.diags(inv) @ union)

    @cached_property
    def mean_aggregator_t(self) -> sp.csr_matrix:
        return sp.csr_matrix(self.mean_aggregator.T)

    def undirected_edges(self) -> np.ndarray:
        """Pares únicos (u, v) con u < v de la proyección no dirigida, sin lazos."""
        if self.num_edges == 0:
            return np.empty((0, 2), dtype=np.int64)
        lo = np.minimum(self.src, self.dst)
        hi = np.maximum(self.src, self.dst)
        keep = lo != hi
        pairs = np.stack([lo[keep], hi[keep]], axis=1)
        return np.unique(pairs, axis=0) if pairs.size else pairs.reshape(0, 2)

    # ------------------------------------------------------------------
    # Derivados
    # ------------------------------------------------------------------

    def subgraph(self, nodes: np.ndarray) -> "TransactionGraph":
        """
        Subgrafo inducido por `nodes` (índices globales, se ordenan).

        Los node_ids externos se conservan; las aristas quedan re-indexadas
        a posiciones locales.
        """
        nodes = np.unique(np.asarray(nodes, dtype=np.int64))
        local = np.full(self.num_nodes, -1, dtype=np.int64)
        local[nodes] = np.arange(nodes.shape[0], dtype=np.int64)
        keep = (local[self.src] >= 0) & (local[self.dst] >= 0)
        return TransactionGraph(
            num_nodes=int(nodes.shape[0]),
            src=local[self.src[keep]],
            dst=local[self.dst[keep]],
            features=self.features[nodes],
            labels=self.labels[nodes],
            time_step=None if self.time_step is None else self.time_step[nodes],
            node_ids=self.node_ids[nodes],
            communities=None if self.communities is None else self.communities[nodes],
            metadata=dict(self.metadata),
        )

    def edge_subgraph(self, keep: np.ndarray) -> "TransactionGraph":
        """Mismos nodos, solo las aristas marcadas en `keep`."""
        keep = np.asarray(keep, dtype=bool)
        return replace(self, src=self.src[keep], dst=self.dst[keep])

    def with_features(self, features: np.ndarray) -> "TransactionGraph":
        return replace(self, features=features)

    def summary(self) -> Dict[str, Any]:
        stats: Dict[str, Any] = {
            "num_nodes": self.num_nodes,
            "num_edges": self.num_edges,
            "feature_dim": self.feature_dim,
        }
        stats.update(self.label_counts())
        return stats


@dataclass(frozen=True)
class NodeMask:
    """
    Rol de cada nodo en la evaluación supervisada.

    role: 0 excluido, 1 entrenamiento, 2 prueba. La regla de derivación queda
    registrada en `rule` y `params`.
    """

    role: np.ndarray
    rule: str
    params: Dict[str, Any] = field(default_factory=dict)

    @property
    def train(self) -> np.ndarray:
        return self.role == ROLE_TRAIN

    @property
    def test(self) -> np.ndarray:
        return self.role == ROLE_TEST

    def subset(self, nodes: np.ndarray) -> "NodeMask":
        """Máscara restringida a `nodes` (índices globales ordenados)."""
        return NodeMask(role=self.role[np.asarray(nodes, dtype=np.int64)], rule=self.rule,
                        params=dict(self.params))

    def counts(self) -> Dict[str, int]:
        return {
            "train": int(np.count_nonzero(self.train)),
            "test": int(np.count_nonzero(self.test)),
            "excluded": int(np.count_nonzero(self.role == ROLE_EXCLUDED)),
        }

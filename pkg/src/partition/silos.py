"""
Asignación de nodos a silos, conjuntos frontera y aristas entre silos.
"""

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd
from loguru import logger

from ..graph.model import TransactionGraph

PathLike = Union[str, Path]


class PartitionError(Exception):
    """Error en el particionado del grafo."""
    pass


@dataclass(frozen=True, eq=False)
class SiloPartition:
    """
    Partición del grafo en K silos.

    assignment[v] es el silo del nodo v (índice global). Los conjuntos
    frontera y las aristas cruzadas se calculan sobre el grafo dirigido: una
    arista en cualquier dirección hacia otro silo convierte al nodo en frontera.
    """

    assignment: np.ndarray
    num_silos: int
    cross_edges: np.ndarray
    num_edges: int
    method: str = "assignment"

    @classmethod
    def from_assignment(
        cls, graph: TransactionGraph, assignment: np.ndarray, num_silos: int,
        method: str = "assignment",
    ) -> "SiloPartition":
        """
        Construye la partición a partir de un vector nodo → silo.

        Raises:
            PartitionError: Si el vector no cubre el grafo o tiene silos fuera de rango
        """
        assignment = np.array(assignment, dtype=np.int64).ravel()
        if num_silos < 1:
            raise PartitionError("K debe ser >= 1")
        if assignment.shape[0] != graph.num_nodes:
            raise PartitionError(
                f"La asignación tiene {assignment.shape[0]} entradas y el grafo "
                f"{graph.num_nodes} nodos"
            )
        if assignment.size and (assignment.min() < 0 or assignment.max() >= num_silos):
            raise PartitionError(f"Silo fuera de rango 0..{num_silos - 1}")

        crossing = assignment[graph.src] != assignment[graph.dst]
        cross = np.stack([graph.src[crossing], graph.dst[crossing]], axis=1)
        assignment.flags.writeable = False
        cross.flags.writeable = False
        return cls(
            assignment=assignment,
            num_silos=int(num_silos),
            cross_edges=cross,
            num_edges=graph.num_edges,
            method=method,
        )

    @property
    def num_nodes(self) -> int:
        return int(self.assignment.shape[0])

    @property
    def cross_edge_fraction(self) -> float:
        if self.num_edges == 0:
            return 0.0
        return self.cross_edges.shape[0] / self.num_edges

    def silo_nodes(self, silo: int) -> np.ndarray:
        """Índices globales (ordenados) de los nodos del silo."""
        return np.flatnonzero(self.assignment == silo)

    def silo_sizes(self) -> List[int]:
        return np.bincount(self.assignment, minlength=self.num_silos).tolist()

    @cached_property
    def boundary_sets(self) -> List[np.ndarray]:
        """B_k: nodos del silo k con al menos una arista hacia otro silo."""
        endpoints = np.unique(self.cross_edges.ravel())
        owner = self.assignment[endpoints]
        return [endpoints[owner == k] for k in range(self.num_silos)]

    def boundary_counts(self) -> List[int]:
        return [int(b.shape[0]) for b in self.boundary_sets]

    @cached_property
    def _links(self) -> np.ndarray:
        """Pares únicos (nodo local, vecino foráneo) de cada arista cruzada, en ambos sentidos."""
        if self.cross_edges.shape[0] == 0:
            return np.empty((0, 2), dtype=np.int64)
        both = np.concatenate([self.cross_edges, self.cross_edges[:, ::-1]])
        return np.unique(both, axis=0)

    def cross_links(self, silo: int) -> np.ndarray:
        """
        Pares (v, u) con v en el silo y u vecino en otro silo, ordenados.
        Son los emparejamientos usados por la pérdida de alineación.
        """
        links = self._links
        return links[self.assignment[links[:, 0]] == silo]

    def routing_targets(self, silo: int) -> Dict[int, np.ndarray]:
        """
        Para cada silo destino j, los nodos frontera de `silo` con un vecino
        en j. Sus embeddings se envían solo a ese destino.
        """
        links = self.cross_links(silo)
        targets: Dict[int, np.ndarray] = {}
        if links.shape[0] == 0:
            return targets
        foreign_silo = self.assignment[links[:, 1]]
        for j in np.unique(foreign_silo):
            targets[int(j)] = np.unique(links[foreign_silo == j, 0])
        return targets

    def summary(self) -> Dict[str, object]:
        return {
            "method": self.method,
            "k": self.num_silos,
            "silo_sizes": self.silo_sizes(),
            "boundary_counts": self.boundary_counts(),
            "cross_edges": int(self.cross_edges.shape[0]),
            "cross_edge_fraction": self.cross_edge_fraction,
        }


def cross_edge_fraction(partition: SiloPartition, graph: TransactionGraph) -> float:
    """Fracción exacta de aristas cuyos extremos están en silos distintos."""
    if partition.num_nodes != graph.num_nodes:
        raise PartitionError("La partición no cubre el grafo")
    if graph.num_edges == 0:
        return 0.0
    crossing = partition.assignment[graph.src] != partition.assignment[graph.dst]
    return int(np.count_nonzero(crossing)) / graph.num_edges


def write_partition_file(
    partition: SiloPartition, graph: TransactionGraph, path: PathLike
) -> Path:
    """Escribe una línea `node_id<TAB>silo_id` por nodo, con los ids externos."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame({"node_id": graph.node_ids, "silo_id": partition.assignment})
    frame.to_csv(path, sep="\t", header=False, index=False)
    logger.info(f"Partición escrita en {path}")
    return path


def read_partition_file(
    path: PathLike, graph: TransactionGraph, num_silos: Optional[int] = None
) -> SiloPartition:
    """
    Lee un archivo `node_id<TAB>silo_id` (por ejemplo una salida de METIS
    convertida) y construye la partición.

    Raises:
        PartitionError: Si faltan nodos, hay ids desconocidos o repetidos
    """
    path = Path(path)
    if not path.exists():
        raise PartitionError(f"Archivo de partición no encontrado: {path}")
    try:
        frame = pd.read_csv(
            path, sep="\t", header=None, names=["node_id", "silo_id"], comment="#"
        )
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise PartitionError(f"Archivo de partición inválido {path}: {e}") from e

    numeric = frame.apply(pd.to_numeric, errors="coerce")
    bad = numeric.isna().any(axis=1).to_numpy()
    if bad.any():
        raise PartitionError(f"{path}:{int(np.argmax(bad)) + 1}: línea mal formada")

    node_ids = numeric["node_id"].to_numpy(dtype=np.int64)
    silos = numeric["silo_id"].to_numpy(dtype=np.int64)
    positions = pd.Index(graph.node_ids).get_indexer(node_ids)
    if (positions < 0).any():
        unknown = node_ids[positions < 0][0]
        raise PartitionError(f"{path}: node_id {unknown} no existe en el grafo")
    if np.unique(positions).shape[0] != positions.shape[0]:
        raise PartitionError(f"{path}: node_id repetido")
    if positions.shape[0] != graph.num_nodes:
        raise PartitionError(
            f"{path}: cubre {positions.shape[0]} de {graph.num_nodes} nodos"
        )

    k = int(silos.max()) + 1 if num_silos is None else num_silos
    assignment = np.empty(graph.num_nodes, dtype=np.int64)
    assignment[positions] = silos
    partition = SiloPartition.from_assignment(graph, assignment, k, method="file")
    logger.info(
        f"Partición importada de {path}: K={k}, "
        f"aristas cruzadas={partition.cross_edge_fraction:.4%}"
    )
    return partition

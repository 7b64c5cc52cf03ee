"""
Estrategias de particionado intercambiables.
Proporciona una interfaz unificada para Louvain, edge-cut y archivos externos.
"""

from abc import ABC, abstractmethod
from typing import Any, Dict, Optional

import numpy as np
from loguru import logger

from ..graph.model import TransactionGraph
from .edgecut import balanced_edgecut
from .louvain import communities_to_silos, louvain
from .silos import PartitionError, SiloPartition, read_partition_file


class Partitioner(ABC):
    """Clase base abstracta para estrategias de particionado."""

    name = ""

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        self.config = config or {}

    @abstractmethod
    def partition(self, graph: TransactionGraph, num_silos: int, seed: int) -> SiloPartition:
        """
        Divide el grafo en `num_silos` silos.

        Args:
            graph: Grafo global
            num_silos: Número de silos K
            seed: Semilla de la estrategia

        Returns:
            Partición resultante
        """
        pass

    @staticmethod
    def _single_silo(graph: TransactionGraph, method: str) -> SiloPartition:
        return SiloPartition.from_assignment(
            graph, np.zeros(graph.num_nodes, dtype=np.int64), 1, method=method
        )


class LouvainPartitioner(Partitioner):
    """Comunidades Louvain agrupadas en K silos balanceados."""

    name = "louvain"

    def partition(self, graph: TransactionGraph, num_silos: int, seed: int) -> SiloPartition:
        resolution = float(self.config.get("resolution", 1.0))
        labeling = louvain(graph, seed=seed, resolution=resolution)
        return communities_to_silos(labeling.labels, num_silos, graph)


class EdgeCutPartitioner(Partitioner):
    """Heurística balanceada de corte mínimo."""

    name = "edgecut"

    def partition(self, graph: TransactionGraph, num_silos: int, seed: int) -> SiloPartition:
        if num_silos == 1:
            logger.info("K=1: todos los nodos en el silo 0")
            return self._single_silo(graph, self.name)
        passes = int(self.config.get("passes", 4))
        return balanced_edgecut(graph, num_silos, seed=seed, passes=passes)


class FilePartitioner(Partitioner):
    """Asignación precalculada (por ejemplo METIS) leída de archivo."""

    name = "file"

    def partition(self, graph: TransactionGraph, num_silos: int, seed: int) -> SiloPartition:
        path = self.config.get("path")
        if not path:
            raise PartitionError("El método 'file' requiere la ruta del archivo de partición")
        partition = read_partition_file(path, graph)
        if num_silos and partition.num_silos != num_silos:
            logger.warning(
                f"El archivo define {partition.num_silos} silos y se pidieron {num_silos}; "
                f"se usa la partición del archivo"
            )
        return partition


PARTITIONERS = {
    "louvain": LouvainPartitioner,
    "edgecut": EdgeCutPartitioner,
    "file": FilePartitioner,
}


def create_partitioner(method: str, config: Optional[Dict[str, Any]] = None) -> Partitioner:
    """
    Factory para crear la estrategia de particionado.

    Raises:
        PartitionError: Si el método no está soportado
    """
    method = (method or "").lower()
    if method not in PARTITIONERS:
        supported = ", ".join(PARTITIONERS.keys())
        raise PartitionError(f"Método de partición no soportado: {method}. Opciones: {supported}")

    partitioner_class = PARTITIONERS[method]
    logger.info(f"Usando particionador: {partitioner_class.__name__}")
    return partitioner_class(config)

"""
Cliente federado: un VASP con su subgrafo privado, su modelo y el buffer de
embeddings foráneos recibidos.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from ..gnn.embeddings import EmbeddingBatch, extract_boundary_embeddings
from ..gnn.losses import class_weights
from ..gnn.model import SageModel
from ..gnn.optim import AdamState
from ..gnn.trainer import StepLosses, train_step
from ..graph.model import NodeMask, TransactionGraph
from ..graph.splits import normalize_features
from ..partition.silos import SiloPartition
from ..tunnel.kem import KemKeyPair


class ProtocolError(Exception):
    """Error en el protocolo federado."""
    pass


@dataclass
class SiloClient:
    """
    Estado privado de un silo.

    graph contiene solo las aristas internas del silo y sus features ya
    normalizadas; los ids externos (node_ids) identifican a los nodos en los
    lotes intercambiados. links son pares (id local, id foráneo) de las
    aristas cruzadas; routes indica qué ids enviar a cada silo destino.
    """

    silo_id: int
    graph: TransactionGraph
    mask: NodeMask
    model: SageModel
    optimizer: AdamState
    keys: Optional[KemKeyPair]
    links: np.ndarray
    routes: Dict[int, np.ndarray]
    class_weight: np.ndarray
    buffer: Dict[int, Tuple[np.ndarray, int]] = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        silo_id: int,
        graph: TransactionGraph,
        partition: SiloPartition,
        mask: NodeMask,
        model: SageModel,
        keys: Optional[KemKeyPair],
        lr: float = 0.01,
        weight_decay: float = 5e-4,
    ) -> "SiloClient":
        """
        Construye el cliente del silo a partir del grafo global.

        Raises:
            ProtocolError: Si el silo está vacío
        """
        nodes = partition.silo_nodes(silo_id)
        if nodes.shape[0] == 0:
            raise ProtocolError(f"El silo {silo_id} no tiene nodos")

        local_mask = mask.subset(nodes)
        subgraph = graph.subgraph(nodes)
        subgraph = subgraph.with_features(normalize_features(subgraph.features, local_mask.train))

        ids = graph.node_ids
        links = ids[partition.cross_links(silo_id)]
        routes = {j: ids[targets] for j, targets in partition.routing_targets(silo_id).items()}

        client_model = model.copy()
        return cls(
            silo_id=silo_id,
            graph=subgraph,
            mask=local_mask,
            model=client_model,
            optimizer=AdamState.for_model(client_model, lr=lr, weight_decay=weight_decay),
            keys=keys,
            links=links.reshape(-1, 2),
            routes=routes,
            class_weight=class_weights(subgraph.labels[local_mask.train]),
        )

    @property
    def num_train(self) -> int:
        return int(np.count_nonzero(self.mask.train))

    @property
    def flagged(self) -> bool:
        """Silo sin nodos etiquetados de entrenamiento."""
        return self.num_train == 0

    @property
    def foreign_ids(self) -> np.ndarray:
        return np.unique(self.links[:, 1])

    def set_model(self, model: SageModel):
        """Recibe θ global; el estado de Adam se conserva entre rondas."""
        self.model = model.copy()

    def alignment_pairs(self) -> Tuple[Optional[np.ndarray], Optional[np.ndarray]]:
        """
        Filas locales y vectores foráneos para la pérdida de alineación,
        una entrada por enlace cruzado cuyo vecino está en el buffer.
        """
        if not self.buffer or self.links.shape[0] == 0:
            return None, None
        present = np.array([int(u) in self.buffer for u in self.links[:, 1]], dtype=bool)
        if not present.any():
            return None, None
        links = self.links[present]
        rows = pd.Index(self.graph.node_ids).get_indexer(links[:, 0])
        foreign = np.stack([self.buffer[int(u)][0] for u in links[:, 1]]).astype(np.float64)
        return rows, foreign

    def train(self, epochs: int, lam: float) -> List[StepLosses]:
        """E épocas de gradiente sobre el subgrafo completo."""
        rows, foreign = self.alignment_pairs()
        labels = self.graph.labels
        losses = []
        for epoch in range(epochs):
            step = train_step(
                self.model,
                self.optimizer,
                self.graph,
                self.graph.features,
                labels,
                self.mask.train,
                class_weight=self.class_weight,
                lam=lam,
                align_rows=rows,
                foreign_vectors=foreign,
            )
            logger.debug(
                f"Silo {self.silo_id} época {epoch + 1}: cls={step.classify:.4f} "
                f"bnd={step.boundary:.4f} total={step.total:.4f}"
            )
            losses.append(step)
        return losses

    def outgoing_batches(self, round: int) -> Dict[int, EmbeddingBatch]:
        """Lote de embeddings de frontera por silo destino, tras el entrenamiento local."""
        if not self.routes:
            return {}
        embeddings, _, _ = self.model.forward(self.graph)
        return {
            j: extract_boundary_embeddings(
                self.model, self.graph, ids, round=round, source_silo=self.silo_id,
                embeddings=embeddings,
            )
            for j, ids in sorted(self.routes.items())
        }

    def receive(self, batch: EmbeddingBatch) -> int:
        """
        Sobrescribe el buffer con los embeddings recibidos. Los ids que no son
        vecinos foráneos de este silo se descartan.

        Returns:
            Número de entradas actualizadas
        """
        expected = np.isin(batch.node_ids, self.foreign_ids)
        if not expected.all():
            logger.warning(
                f"Silo {self.silo_id}: {int((~expected).sum())} embeddings de nodos no "
                f"vecinos descartados (origen {batch.source_silo})"
            )
        for node_id, vector in zip(batch.node_ids[expected], batch.vectors[expected]):
            self.buffer[int(node_id)] = (vector.copy(), batch.round)
        return int(expected.sum())

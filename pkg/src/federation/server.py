"""
Servidor de agregación: registro de claves públicas, FedAvg y cola de ruteo
de sobres cifrados. Nunca ve claves secretas ni embeddings en claro.
"""

from typing import Dict, List, Optional, Tuple

import numpy as np
from loguru import logger

from ..gnn.model import ModelError, SageModel
from ..tunnel.envelope import EnvelopeLog, SecureEnvelope
from .client import ProtocolError


def fedavg(models: List[SageModel], weights: List[float]) -> SageModel:
    """
    Media ponderada parámetro a parámetro, con pesos normalizados a suma 1.

    Los modelos con peso cero se ignoran; si todos los restantes son
    idénticos se devuelve una copia exacta.

    Raises:
        ProtocolError: Sin modelos, pesos negativos o todos cero
        ModelError: Si las arquitecturas no coinciden
    """
    if not models:
        raise ProtocolError("fedavg requiere al menos un modelo")
    if len(models) != len(weights):
        raise ProtocolError(f"{len(models)} modelos y {len(weights)} pesos")
    w = np.asarray(weights, dtype=np.float64)
    if (w < 0).any():
        raise ProtocolError("Los pesos de FedAvg deben ser no negativos")
    total = w.sum()
    if total <= 0:
        raise ProtocolError("Todos los pesos de FedAvg son cero")

    reference = models[0]
    for model in models[1:]:
        if not model.same_architecture(reference):
            raise ModelError(
                f"Arquitecturas distintas en FedAvg: ({model.in_dim}, {model.hidden}) vs "
                f"({reference.in_dim}, {reference.hidden})"
            )

    active = [(m, wi / total) for m, wi in zip(models, w) if wi > 0]
    vectors = [m.flatten() for m, _ in active]
    if all(np.array_equal(vectors[0], v) for v in vectors[1:]):
        return active[0][0].copy()

    out = np.zeros_like(vectors[0])
    for vector, (_, nw) in zip(vectors, active):
        out = out + nw * vector
    return reference.unflatten(out)


class AggregationServer:
    """
    Coordinador de rondas.

    Guarda las claves públicas, los modelos subidos en la ronda en curso y
    los sobres serializados pendientes de entrega. De los sobres ya
    entregados retiene solo los de la última ruta, salvo con `keep_archive`,
    que los conserva todos para auditar lo observado. El registro de sobres
    conserva solo tamaños y encabezados.
    """

    def __init__(self, global_model: SageModel, keep_archive: bool = False):
        self.global_model = global_model.copy()
        self.public_keys: Dict[int, bytes] = {}
        self.log = EnvelopeLog()
        self._uploads: List[Tuple[int, SageModel, float]] = []
        self._queue: List[bytes] = []
        self.keep_archive = keep_archive
        self._delivered: List[bytes] = []

    def register(self, silo_id: int, public_key: bytes):
        self.public_keys[silo_id] = bytes(public_key)
        logger.debug(f"Clave pública registrada para el silo {silo_id}")

    def public_key(self, silo_id: int) -> bytes:
        """
        Raises:
            ProtocolError: Si el silo no registró su clave
        """
        if silo_id not in self.public_keys:
            raise ProtocolError(f"El silo {silo_id} no registró clave pública")
        return self.public_keys[silo_id]

    def broadcast(self) -> SageModel:
        return self.global_model.copy()

    def upload_model(self, silo_id: int, model: SageModel, weight: float):
        self._uploads.append((silo_id, model.copy(), float(weight)))

    def upload_envelope(self, envelope: SecureEnvelope):
        """Encola un sobre para su destinatario y lo registra para la contabilidad."""
        if envelope.recipient not in self.public_keys:
            raise ProtocolError(f"Destinatario desconocido: silo {envelope.recipient}")
        self.log.record(envelope)
        self._queue.append(envelope.to_bytes())

    @property
    def num_uploads(self) -> int:
        return len(self._uploads)

    def aggregate(self) -> SageModel:
        """
        FedAvg sobre los modelos de la ronda, en orden de silo.

        Raises:
            ProtocolError: Si no hubo modelos subidos
        """
        if not self._uploads:
            raise ProtocolError("No hay modelos para agregar")
        uploads = sorted(self._uploads, key=lambda u: u[0])
        models = [m for _, m, _ in uploads]
        weights = [w for _, _, w in uploads]
        if sum(weights) <= 0:
            logger.warning("Ningún silo tiene nodos de entrenamiento; se promedia uniformemente")
            weights = [1.0] * len(models)
        self.global_model = fedavg(models, weights)
        self._uploads = []
        return self.global_model.copy()

    def route(self) -> Dict[int, List[SecureEnvelope]]:
        """Entrega los sobres encolados agrupados por destinatario y vacía la cola."""
        delivery: Dict[int, List[SecureEnvelope]] = {}
        for data in self._queue:
            envelope = SecureEnvelope.from_bytes(data)
            delivery.setdefault(envelope.recipient, []).append(envelope)
        if self.keep_archive:
            self._delivered.extend(self._queue)
        else:
            self._delivered = self._queue
        self._queue = []
        return delivery

    def observable_bytes(self) -> bytes:
        """Todo lo que el servidor retiene: sobres (pendientes y entregados) y θ global."""
        return b"".join(self._delivered + self._queue) + self.global_model.flatten().tobytes()

    def get_stats(self, round: Optional[int] = None) -> Dict[str, int]:
        records = self.log.records if round is None else self.log.for_round(round)
        return {
            "envelopes": len(records),
            "pending": len(self._queue),
            "payload_bytes": sum(r.payload_bytes for r in records),
            "envelope_bytes": sum(r.envelope_bytes for r in records),
        }

"""
Protocolo de entrenamiento federado por rondas.

Orden de una ronda: broadcast de θ, entrenamiento local (paralelo), extracción
y cifrado de embeddings de frontera, subida, FedAvg, ruteo y descifrado, y
por último actualización de buffers. Los buffers usados en la ronda t solo
contienen embeddings producidos en rondas anteriores.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from loguru import logger
from sklearn.metrics import f1_score, precision_score, recall_score

from ..config import ExperimentConfig
from ..gnn.embeddings import EmbeddingBatch
from ..gnn.losses import class_weights, softmax
from ..gnn.model import SageModel
from ..gnn.optim import AdamState
from ..gnn.trainer import StepLosses, train_step
from ..graph.model import LABEL_ILLICIT, NodeMask, TransactionGraph
from ..graph.splits import SplitRule, make_split, normalize_features
from ..partition.silos import SiloPartition
from ..tunnel.envelope import decrypt_batch, encrypt_batch
from ..tunnel.kem import AuthenticationError, KemProvider, create_kem_provider
from .accounting import CommReport, model_bytes
from .client import SiloClient
from .server import AggregationServer

METRIC_COLUMNS = [
    "round",
    "seed",
    "mode",
    "f1",
    "precision",
    "recall",
    "loss_cls",
    "loss_bnd",
    "bytes_model",
    "bytes_embed",
    "bytes_overhead",
]


@dataclass(frozen=True)
class RoundMetrics:
    round: int
    seed: int
    mode: str
    f1: float
    precision: float
    recall: float
    loss_cls: float = 0.0
    loss_bnd: float = 0.0
    bytes_model: int = 0
    bytes_embed: int = 0
    bytes_overhead: int = 0
    envelopes: int = 0
    dropped: int = 0
    uploads: int = 0
    flagged_silos: Tuple[int, ...] = ()
    seconds: float = 0.0

    def as_row(self) -> Dict[str, object]:
        return {name: getattr(self, name) for name in METRIC_COLUMNS}


@dataclass
class SeedResult:
    seed: int
    mode: str
    rounds: List[RoundMetrics]
    model: Optional[SageModel]
    clients: List[SiloClient]
    comm: CommReport
    seconds: float

    @property
    def final(self) -> RoundMetrics:
        return self.rounds[-1]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    seeds: List[SeedResult] = field(default_factory=list)

    @property
    def rounds(self) -> List[RoundMetrics]:
        return [r for s in self.seeds for r in s.rounds]


def split_rule(config: ExperimentConfig) -> SplitRule:
    if config.split == "random":
        return SplitRule.random(config.train_fraction, config.split_seed)
    return SplitRule.temporal(config.train_max_step)


def local_train(client: SiloClient, epochs: int, lam: float) -> List[StepLosses]:
    """
    E épocas de gradiente sobre L_total con el buffer actual del cliente.
    Con buffer vacío el término de frontera es exactamente 0.
    """
    return client.train(epochs, lam)


def _scores(y_true: np.ndarray, y_pred: np.ndarray) -> Dict[str, float]:
    if y_true.size == 0:
        return {"f1": 0.0, "precision": 0.0, "recall": 0.0}
    kwargs = {"pos_label": LABEL_ILLICIT, "zero_division": 0}
    return {
        "f1": float(f1_score(y_true, y_pred, **kwargs)),
        "precision": float(precision_score(y_true, y_pred, **kwargs)),
        "recall": float(recall_score(y_true, y_pred, **kwargs)),
    }


def evaluate(clients: List[SiloClient], model: Optional[SageModel] = None) -> Dict[str, float]:
    """
    F1/precision/recall de la clase ilícita sobre los nodos de prueba de
    todos los silos juntos. Cada silo infiere con su topología local; si
    `model` es None se usa el modelo propio de cada cliente.
    """
    y_true, y_pred = [], []
    for client in clients:
        test = client.mask.test
        if not test.any():
            continue
        evaluator = model if model is not None else client.model
        _, logits, _ = evaluator.forward(client.graph)
        y_true.append(client.graph.labels[test].astype(np.int64))
        y_pred.append(softmax(logits[test]).argmax(axis=1))
    if not y_true:
        return _scores(np.empty(0), np.empty(0))
    return _scores(np.concatenate(y_true), np.concatenate(y_pred))


def local_view(
    graph: TransactionGraph, partition: SiloPartition, mask: NodeMask
) -> TransactionGraph:
    """
    Grafo global sin aristas entre silos y con features normalizadas por
    silo: la unión de lo que ve cada cliente, en índices globales.
    """
    intra = partition.assignment[graph.src] == partition.assignment[graph.dst]
    features = np.empty(graph.features.shape, dtype=np.float32)
    for silo in range(partition.num_silos):
        nodes = partition.silo_nodes(silo)
        if nodes.shape[0]:
            features[nodes] = normalize_features(graph.features[nodes], mask.train[nodes])
    return graph.edge_subgraph(intra).with_features(features)


def _train_all(
    clients: List[SiloClient], epochs: int, lam: float, workers: int
) -> List[List[StepLosses]]:
    if workers <= 1 or len(clients) == 1:
        return [local_train(c, epochs, lam) for c in clients]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: local_train(c, epochs, lam), clients))


def run_round(
    clients: List[SiloClient],
    server: AggregationServer,
    round: int,
    config: ExperimentConfig,
    seed: int = 0,
    provider: Optional[KemProvider] = None,
) -> RoundMetrics:
    """
    Ejecuta una ronda completa del protocolo.

    Un sobre que no autentica se descarta y se cuenta; la ronda continúa.
    """
    start = time.perf_counter()
    federated = config.mode != "local"
    exchange = config.exchange_active(round)

    # 1. Broadcast
    if federated:
        global_model = server.broadcast()
        for client in clients:
            client.set_model(global_model)

    # 2. Entrenamiento local
    losses = _train_all(clients, config.epochs, config.lam, config.workers)
    flagged = tuple(c.silo_id for c in clients if c.flagged)
    if flagged:
        logger.warning(f"Ronda {round}: silos sin nodos de entrenamiento {list(flagged)}")

    # 3-4. Extracción, cifrado y subida
    if exchange:
        for client in clients:
            for recipient, batch in client.outgoing_batches(round).items():
                envelope = encrypt_batch(
                    server.public_key(recipient), batch, client.silo_id, recipient, round,
                    provider=provider,
                )
                server.upload_envelope(envelope)
    if federated:
        for client in clients:
            server.upload_model(client.silo_id, client.model, client.num_train)
    uploads = server.num_uploads

    # 5. FedAvg
    global_model = server.aggregate() if federated else None

    # 6. Ruteo y descifrado
    dropped = 0
    received: List[Tuple[SiloClient, EmbeddingBatch]] = []
    by_id = {c.silo_id: c for c in clients}
    if exchange:
        for recipient, envelopes in sorted(server.route().items()):
            client = by_id[recipient]
            for envelope in envelopes:
                try:
                    batch = decrypt_batch(
                        client.keys.secret_key, envelope, provider=provider, dim=config.hidden
                    )
                except AuthenticationError as e:
                    dropped += 1
                    logger.warning(f"Ronda {round}: sobre descartado ({e})")
                    continue
                received.append((client, batch))

    # 7. Actualización de buffers
    for client, batch in received:
        client.receive(batch)

    scores = evaluate(clients, global_model)
    records = server.log.for_round(round)
    embed = sum(r.payload_bytes for r in records)
    num_parameters = clients[0].model.num_parameters
    metrics = RoundMetrics(
        round=round,
        seed=seed,
        mode=config.mode,
        f1=scores["f1"],
        precision=scores["precision"],
        recall=scores["recall"],
        loss_cls=float(np.mean([steps[-1].classify for steps in losses])),
        loss_bnd=float(np.mean([steps[-1].boundary for steps in losses])),
        bytes_model=model_bytes(num_parameters, uploads),
        bytes_embed=embed,
        bytes_overhead=sum(r.envelope_bytes for r in records) - embed,
        envelopes=len(records),
        dropped=dropped,
        uploads=uploads,
        flagged_silos=flagged,
        seconds=time.perf_counter() - start,
    )
    logger.info(
        f"Ronda {round} [{config.mode}] F1={metrics.f1:.4f} P={metrics.precision:.4f} "
        f"R={metrics.recall:.4f} cls={metrics.loss_cls:.4f} bnd={metrics.loss_bnd:.4f} "
        f"sobres={metrics.envelopes} descartados={dropped}"
    )
    return metrics


def setup_federation(
    graph: TransactionGraph,
    partition: SiloPartition,
    mask: NodeMask,
    config: ExperimentConfig,
    seed: int,
    provider: Optional[KemProvider] = None,
) -> Tuple[List[SiloClient], AggregationServer]:
    """Inicializa θ con la semilla, genera claves por silo y registra las públicas."""
    model = SageModel.initialize(graph.feature_dim, config.hidden, seed)
    server = AggregationServer(model)
    clients = []
    for silo in range(partition.num_silos):
        keys = provider.keygen() if provider is not None else None
        client = SiloClient.build(
            silo, graph, partition, mask, model, keys,
            lr=config.lr, weight_decay=config.weight_decay,
        )
        if keys is not None:
            server.register(silo, keys.public_key)
        clients.append(client)
    return clients, server


def run_seed(
    graph: TransactionGraph,
    partition: SiloPartition,
    mask: NodeMask,
    config: ExperimentConfig,
    seed: int,
    provider: Optional[KemProvider] = None,
) -> SeedResult:
    """Entrenamiento completo para una semilla. La ronda 0 evalúa el modelo inicial."""
    start = time.perf_counter()
    if config.exchanges_embeddings and provider is None:
        provider = create_kem_provider(config.kem_provider)
    clients, server = setup_federation(
        graph, partition, mask, config, seed,
        provider=provider if config.exchanges_embeddings else None,
    )

    initial = evaluate(clients, server.global_model)
    rounds = [RoundMetrics(round=0, seed=seed, mode=config.mode, **initial)]
    uploads: Dict[int, int] = {}
    for t in range(1, config.rounds + 1):
        metrics = run_round(clients, server, t, config, seed=seed, provider=provider)
        rounds.append(metrics)
        uploads[t] = metrics.uploads

    comm = CommReport.from_log(
        config.mode, server.log.records, server.global_model.num_parameters, uploads
    )
    final_model = server.global_model if config.mode != "local" else None
    elapsed = time.perf_counter() - start
    logger.info(
        f"Semilla {seed} [{config.mode}]: F1 final={rounds[-1].f1:.4f} en {elapsed:.1f}s"
    )
    return SeedResult(seed, config.mode, rounds, final_model, clients, comm, elapsed)


def run_experiment(
    config: ExperimentConfig,
    graph: TransactionGraph,
    partition: SiloPartition,
    mask: Optional[NodeMask] = None,
    provider: Optional[KemProvider] = None,
) -> ExperimentResult:
    """
    Ejecuta el experimento para cada semilla de la configuración.

    Raises:
        ConfigError: Si la configuración es inválida
    """
    config.validate()
    mask = mask if mask is not None else make_split(graph, split_rule(config))
    logger.info(
        f"Experimento {config.mode}: K={partition.num_silos}, R={config.rounds}, "
        f"E={config.epochs}, λ={config.lam}, semillas={config.seeds}"
    )
    result = ExperimentResult(config)
    for seed in config.seeds:
        result.seeds.append(run_seed(graph, partition, mask, config, seed, provider=provider))
    return result


def train_centralized(
    graph: TransactionGraph, mask: NodeMask, config: ExperimentConfig, seed: int
) -> Tuple[SageModel, List[StepLosses]]:
    """
    Referencia centralizada: un solo modelo sobre el grafo completo con
    R × E pasos y el mismo estado de Adam.
    """
    features = normalize_features(graph.features, mask.train)
    model = SageModel.initialize(graph.feature_dim, config.hidden, seed)
    state = AdamState.for_model(model, lr=config.lr, weight_decay=config.weight_decay)
    weights = class_weights(graph.labels[mask.train])
    history = []
    for _ in range(config.rounds * config.epochs):
        history.append(
            train_step(model, state, graph, features, graph.labels, mask.train,
                       class_weight=weights)
        )
    return model, history

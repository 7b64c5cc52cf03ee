"""
Protocolo federado: clientes, servidor de agregación, rondas y métricas.
"""

from .accounting import CommReport, RoundBytes, model_bytes, round_bytes
from .client import ProtocolError, SiloClient
from .metrics import (
    mean_std,
    metrics_frame,
    summarize,
    write_metrics_csv,
    write_summary_json,
)
from .protocol import (
    METRIC_COLUMNS,
    ExperimentResult,
    RoundMetrics,
    SeedResult,
    evaluate,
    local_train,
    local_view,
    run_experiment,
    run_round,
    run_seed,
    setup_federation,
    split_rule,
    train_centralized,
)
from .server import AggregationServer, fedavg

__all__ = [
    "METRIC_COLUMNS",
    "AggregationServer",
    "CommReport",
    "ExperimentResult",
    "ProtocolError",
    "RoundBytes",
    "RoundMetrics",
    "SeedResult",
    "SiloClient",
    "evaluate",
    "fedavg",
    "local_train",
    "local_view",
    "mean_std",
    "metrics_frame",
    "model_bytes",
    "round_bytes",
    "run_experiment",
    "run_round",
    "run_seed",
    "setup_federation",
    "split_rule",
    "summarize",
    "train_centralized",
    "write_metrics_csv",
    "write_summary_json",
]

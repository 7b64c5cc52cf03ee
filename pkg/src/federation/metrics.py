"""
Tablas de métricas por ronda (CSV) y resumen entre semillas (JSON).
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
import pandas as pd
from loguru import logger

from .protocol import METRIC_COLUMNS, ExperimentResult, RoundMetrics

PathLike = Union[str, Path]
SUMMARY_METRICS = ("f1", "precision", "recall")


def metrics_frame(rounds: List[RoundMetrics]) -> pd.DataFrame:
    return pd.DataFrame([r.as_row() for r in rounds], columns=METRIC_COLUMNS)


def write_metrics_csv(rounds: List[RoundMetrics], path: PathLike) -> Path:
    """CSV con encabezado y formato numérico fijo, independiente del locale."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    metrics_frame(rounds).to_csv(path, index=False, float_format="%.6f")
    logger.info(f"Métricas escritas en {path}")
    return path


def mean_std(values: List[float]) -> Dict[str, float]:
    """Media y desviación estándar muestral (0 con una sola semilla)."""
    data = np.asarray(values, dtype=np.float64)
    if data.size == 0:
        return {"mean": 0.0, "std": 0.0}
    std = float(data.std(ddof=1)) if data.size > 1 else 0.0
    return {"mean": float(data.mean()), "std": std}


def summarize(result: ExperimentResult) -> Dict[str, Any]:
    """Resumen de métricas finales por semilla y su media ± desviación."""
    finals = [s.final for s in result.seeds]
    summary: Dict[str, Any] = {
        "mode": result.config.mode,
        "seeds": [s.seed for s in result.seeds],
        "rounds": result.config.rounds,
        "final": {
            name: mean_std([getattr(r, name) for r in finals]) for name in SUMMARY_METRICS
        },
        "per_seed": [
            {"seed": s.seed, **{name: getattr(s.final, name) for name in SUMMARY_METRICS},
             "seconds": s.seconds}
            for s in result.seeds
        ],
        "communication": mean_std_dict([s.comm.totals() for s in result.seeds]),
        "dropped_envelopes": int(sum(r.dropped for r in result.rounds)),
        "flagged_silos": sorted({k for r in result.rounds for k in r.flagged_silos}),
        "wall_clock": mean_std([s.seconds for s in result.seeds]),
        "config": result.config.to_dict(),
    }
    return summary


def mean_std_dict(rows: List[Dict[str, int]]) -> Dict[str, Dict[str, float]]:
    if not rows:
        return {}
    return {key: mean_std([row[key] for row in rows]) for key in rows[0]}


def write_summary_json(summary: Dict[str, Any], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(summary, f, ensure_ascii=False, indent=2, sort_keys=True)
    logger.info(f"Resumen escrito en {path}")
    return path

"""
Medición del costo del túnel: latencia por sobre, throughput y expansión.
"""

import time
from dataclasses import asdict, dataclass
from typing import Iterable, List, Optional

import numpy as np
import pandas as pd
from loguru import logger

from ..gnn.embeddings import EmbeddingBatch
from .envelope import decrypt_batch, encrypt_batch
from .kem import KemProvider, default_provider, kem_keygen

BENCH_COLUMNS = [
    "batch_size",
    "total_ms",
    "per_embedding_ms",
    "embeddings_per_sec",
    "expansion_ratio",
    "decrypt_ms",
    "payload_bytes",
    "envelope_bytes",
]


@dataclass(frozen=True)
class OverheadRow:
    batch_size: int
    total_ms: float
    per_embedding_ms: float
    embeddings_per_sec: float
    expansion_ratio: float
    decrypt_ms: float
    payload_bytes: int
    envelope_bytes: int


def measure_overhead(
    batch_sizes: Iterable[int],
    dim: int = 128,
    repeats: int = 5,
    seed: int = 0,
    provider: Optional[KemProvider] = None,
) -> List[OverheadRow]:
    """
    Cifra lotes aleatorios de cada tamaño y mide la mediana de `repeats`
    ejecuciones. total_ms cubre encapsulación + AES-GCM de un sobre completo.
    """
    provider = provider or default_provider()
    rng = np.random.default_rng(seed)
    keys = kem_keygen(provider=provider)
    rows: List[OverheadRow] = []

    for size in batch_sizes:
        size = int(size)
        batch = EmbeddingBatch(
            np.arange(size, dtype=np.int64),
            rng.standard_normal((size, dim)).astype(np.float32),
        )
        enc_times, dec_times = [], []
        envelope = None
        for _ in range(max(1, repeats)):
            start = time.perf_counter()
            envelope = encrypt_batch(keys.public_key, batch, 0, 1, 0, provider=provider)
            enc_times.append(time.perf_counter() - start)
            start = time.perf_counter()
            decrypt_batch(keys.secret_key, envelope, provider=provider, dim=dim)
            dec_times.append(time.perf_counter() - start)

        total_ms = float(np.median(enc_times) * 1000.0)
        payload = batch.payload_size
        row = OverheadRow(
            batch_size=size,
            total_ms=total_ms,
            per_embedding_ms=total_ms / size if size else total_ms,
            embeddings_per_sec=size / (total_ms / 1000.0) if total_ms > 0 else float("inf"),
            expansion_ratio=len(envelope) / payload,
            decrypt_ms=float(np.median(dec_times) * 1000.0),
            payload_bytes=payload,
            envelope_bytes=len(envelope),
        )
        logger.info(
            f"Lote {size}: {row.total_ms:.2f} ms, {row.embeddings_per_sec:.0f} emb/s, "
            f"expansión {row.expansion_ratio:.3f}x"
        )
        rows.append(row)
    return rows


def overhead_table(rows: List[OverheadRow]) -> pd.DataFrame:
    return pd.DataFrame([asdict(r) for r in rows], columns=BENCH_COLUMNS)

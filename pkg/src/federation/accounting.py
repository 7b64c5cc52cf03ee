"""
Contabilidad de comunicación por ronda: parámetros del modelo, payload de
embeddings y sobrecarga del túnel post-cuántico.
"""

from dataclasses import dataclass
from typing import Dict, List

import pandas as pd

from ..tunnel.envelope import EnvelopeRecord

FLOAT_BYTES = 4

REPORT_ROWS = ("Model parameters", "Boundary embeddings", "PQC ciphertext overhead")


@dataclass(frozen=True)
class RoundBytes:
    round: int
    model: int
    embed: int
    overhead: int
    envelopes: int

    @property
    def total(self) -> int:
        return self.model + self.embed + self.overhead


def model_bytes(num_parameters: int, uploads: int) -> int:
    """Bytes de parámetros subidos: parámetros × 4 × número de subidas."""
    return num_parameters * FLOAT_BYTES * uploads


def round_bytes(
    round: int, records: List[EnvelopeRecord], num_parameters: int, uploads: int
) -> RoundBytes:
    """Bytes de una ronda recalculados a partir del registro de sobres."""
    embed = sum(r.payload_bytes for r in records)
    wire = sum(r.envelope_bytes for r in records)
    return RoundBytes(
        round=round,
        model=model_bytes(num_parameters, uploads),
        embed=embed,
        overhead=wire - embed,
        envelopes=len(records),
    )


@dataclass
class CommReport:
    """Bytes de comunicación por ronda de una ejecución."""

    mode: str
    num_parameters: int
    rounds: List[RoundBytes]

    @classmethod
    def from_log(
        cls,
        mode: str,
        records: List[EnvelopeRecord],
        num_parameters: int,
        uploads_per_round: Dict[int, int],
    ) -> "CommReport":
        """
        Args:
            uploads_per_round: {ronda: número de modelos subidos}
        """
        by_round: Dict[int, List[EnvelopeRecord]] = {t: [] for t in uploads_per_round}
        for record in records:
            by_round.setdefault(record.round, []).append(record)
        rows = [
            round_bytes(t, by_round[t], num_parameters, uploads_per_round.get(t, 0))
            for t in sorted(by_round)
        ]
        return cls(mode=mode, num_parameters=num_parameters, rounds=rows)

    def totals(self) -> Dict[str, int]:
        return {
            "model": sum(r.model for r in self.rounds),
            "embed": sum(r.embed for r in self.rounds),
            "overhead": sum(r.overhead for r in self.rounds),
            "envelopes": sum(r.envelopes for r in self.rounds),
        }

    def per_round(self) -> Dict[str, float]:
        """Promedio por ronda de cada categoría."""
        n = max(1, len(self.rounds))
        totals = self.totals()
        return {key: value / n for key, value in totals.items()}

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "round": r.round,
                    "bytes_model": r.model,
                    "bytes_embed": r.embed,
                    "bytes_overhead": r.overhead,
                    "bytes_total": r.total,
                    "envelopes": r.envelopes,
                }
                for r in self.rounds
            ],
            columns=["round", "bytes_model", "bytes_embed", "bytes_overhead", "bytes_total",
                     "envelopes"],
        )

    def format_table(self) -> str:
        """Tabla de costo por ronda (KB) con las filas del reporte de comunicación."""
        avg = self.per_round()
        values = [avg["model"], avg["embed"], avg["overhead"]]
        width = max(len(label) for label in REPORT_ROWS + ("Total per round",))
        lines = [f"{'Component':<{width}}  {'Size (KB)':>12}", "-" * (width + 14)]
        for label, value in zip(REPORT_ROWS, values):
            lines.append(f"{label:<{width}}  {value / 1024:>12.2f}")
        lines.append("-" * (width + 14))
        lines.append(f"{'Total per round':<{width}}  {sum(values) / 1024:>12.2f}")
        return "\n".join(lines)

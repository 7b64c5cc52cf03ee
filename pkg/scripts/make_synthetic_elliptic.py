"""
Script para crear un dataset sintético con el layout público de Elliptic.

Genera los tres CSV (features, classes, edgelist) a partir del grafo SBM de
src.graph.generate_synthetic, útil para probar la CLI sin descargar datos.

Ejecutar: python scripts/make_synthetic_elliptic.py --out ./data/elliptic-synth
"""

import sys
from pathlib import Path

import click
import numpy as np
import pandas as pd
from loguru import logger

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from src.graph import LABEL_ILLICIT, LABEL_LICIT, generate_synthetic  # noqa: E402
from src.graph.loaders import (  # noqa: E402
    ELLIPTIC_CLASSES_FILE,
    ELLIPTIC_EDGELIST_FILE,
    ELLIPTIC_FEATURES_FILE,
)

# Los txId reales no son contiguos; se desplazan para detectar confusiones con índices
TX_ID_OFFSET = 230_000_000


def write_elliptic_layout(graph, out_dir: Path) -> None:
    """Escribe el grafo en los tres CSV de Elliptic dentro de `out_dir`."""
    out_dir.mkdir(parents=True, exist_ok=True)
    tx_ids = np.arange(graph.num_nodes, dtype=np.int64) + TX_ID_OFFSET

    features = pd.DataFrame(graph.features.astype(np.float64))
    features.insert(0, "time_step", graph.time_step)
    features.insert(0, "txId", tx_ids)
    features.to_csv(out_dir / ELLIPTIC_FEATURES_FILE, header=False, index=False)

    classes = np.full(graph.num_nodes, "unknown", dtype=object)
    classes[graph.labels == LABEL_ILLICIT] = "1"
    classes[graph.labels == LABEL_LICIT] = "2"
    pd.DataFrame({"txId": tx_ids, "class": classes}).to_csv(
        out_dir / ELLIPTIC_CLASSES_FILE, index=False
    )

    src, dst = graph.edge_list()
    pd.DataFrame({"txId1": tx_ids[src], "txId2": tx_ids[dst]}).to_csv(
        out_dir / ELLIPTIC_EDGELIST_FILE, index=False
    )


@click.command()
@click.option("--out", "out_dir", type=click.Path(), default="./data/elliptic-synth",
              show_default=True, help="Directorio de salida")
@click.option("--communities", default=4, show_default=True, help="Número de comunidades")
@click.option("--nodes-per-community", default=250, show_default=True)
@click.option("--p-intra", default=0.02, show_default=True)
@click.option("--p-inter", default=0.001, show_default=True)
@click.option("--dim", "feature_dim", default=32, show_default=True, help="Dimensión de features")
@click.option("--illicit-fraction", default=0.1, show_default=True)
@click.option("--unlabeled-fraction", default=0.3, show_default=True)
@click.option("--seed", default=42, show_default=True)
def main(out_dir, communities, nodes_per_community, p_intra, p_inter, feature_dim,
         illicit_fraction, unlabeled_fraction, seed):
    """Crea un dataset sintético con el layout de Elliptic."""
    graph = generate_synthetic(
        num_communities=communities,
        nodes_per_community=nodes_per_community,
        p_intra=p_intra,
        p_inter=p_inter,
        feature_dim=feature_dim,
        illicit_fraction=illicit_fraction,
        unlabeled_fraction=unlabeled_fraction,
        seed=seed,
    )
    out = Path(out_dir)
    write_elliptic_layout(graph, out)

    counts = graph.label_counts()
    logger.info(f"Dataset sintético creado en {out}")
    logger.info(
        f"  {graph.num_nodes} transacciones, {graph.num_edges} aristas, "
        f"ilícitas={counts['illicit']}, lícitas={counts['licit']}, "
        f"sin etiqueta={counts['unknown']}"
    )
    logger.info(f"Para entrenar: fgv train --dataset elliptic --data {out}")


if __name__ == "__main__":
    main()

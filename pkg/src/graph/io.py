"""
Formato de texto para grafos: <prefix>.nodes y <prefix>.edges (TSV con encabezado).

<prefix>.nodes: node_id, label, time_step, community, f0..f{d-1}
<prefix>.edges: src, dst (node_id externos)

time_step y community valen -1 cuando el grafo no los tiene.
"""

from pathlib import Path
from typing import Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger

from .model import DataFormatError, GraphError, ReferentialIntegrityError, TransactionGraph

PathLike = Union[str, Path]

_NODE_COLUMNS = ["node_id", "label", "time_step", "community"]


def _paths(prefix: PathLike) -> Tuple[Path, Path]:
    prefix = Path(prefix)
    return prefix.with_name(prefix.name + ".nodes"), prefix.with_name(prefix.name + ".edges")


def save_graph_text(graph: TransactionGraph, prefix: PathLike) -> Tuple[Path, Path]:
    """Exporta el grafo. Devuelve las rutas escritas."""
    nodes_path, edges_path = _paths(prefix)
    nodes_path.parent.mkdir(parents=True, exist_ok=True)

    missing = np.full(graph.num_nodes, -1, dtype=np.int64)
    nodes = pd.DataFrame(
        {
            "node_id": graph.node_ids,
            "label": graph.labels.astype(np.int64),
            "time_step": missing if graph.time_step is None else graph.time_step,
            "community": missing if graph.communities is None else graph.communities,
        }
    )
    feats = pd.DataFrame(
        graph.features, columns=[f"f{i}" for i in range(graph.feature_dim)]
    )
    pd.concat([nodes, feats], axis=1).to_csv(
        nodes_path, sep="\t", index=False, float_format="%.9g"
    )

    edges = pd.DataFrame({"src": graph.node_ids[graph.src], "dst": graph.node_ids[graph.dst]})
    edges.to_csv(edges_path, sep="\t", index=False)

    logger.info(f"Grafo exportado: {nodes_path}, {edges_path}")
    return nodes_path, edges_path


def load_graph_text(prefix: PathLike) -> TransactionGraph:
    """Importa un grafo escrito por save_graph_text."""
    nodes_path, edges_path = _paths(prefix)
    for path in (nodes_path, edges_path):
        if not path.exists():
            raise GraphError(f"Archivo no encontrado: {path}")

    try:
        nodes = pd.read_csv(nodes_path, sep="\t")
        edges = pd.read_csv(edges_path, sep="\t")
    except pd.errors.ParserError as e:
        raise DataFormatError(f"fila mal formada: {e}", path=str(nodes_path)) from e

    absent = [c for c in _NODE_COLUMNS if c not in nodes.columns]
    if absent:
        raise DataFormatError(f"columnas ausentes {absent}", path=str(nodes_path))
    if nodes.isna().to_numpy().any():
        row = int(np.argmax(nodes.isna().any(axis=1).to_numpy()))
        raise DataFormatError("valor faltante", path=str(nodes_path), line=row + 2)

    node_ids = nodes["node_id"].to_numpy(dtype=np.int64)
    index = pd.Index(node_ids)
    feature_cols = [c for c in nodes.columns if c not in _NODE_COLUMNS]

    src = index.get_indexer(edges["src"].to_numpy(dtype=np.int64))
    dst = index.get_indexer(edges["dst"].to_numpy(dtype=np.int64))
    bad = (src < 0) | (dst < 0)
    if bad.any():
        row = int(np.argmax(bad))
        raise ReferentialIntegrityError(
            f"{edges_path}:{row + 2}: arista con node_id inexistente"
        )

    time_step = nodes["time_step"].to_numpy(dtype=np.int64)
    community = nodes["community"].to_numpy(dtype=np.int64)
    features = nodes[feature_cols].to_numpy(dtype=np.float32)
    return TransactionGraph(
        num_nodes=len(nodes),
        src=src,
        dst=dst,
        features=features.reshape(len(nodes), len(feature_cols)),
        labels=nodes["label"].to_numpy(dtype=np.int64),
        time_step=None if (time_step < 0).all() else time_step,
        node_ids=node_ids,
        communities=None if (community < 0).all() else community,
        metadata={"dataset": "text", "prefix": str(prefix)},
    )

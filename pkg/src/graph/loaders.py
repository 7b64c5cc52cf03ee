"""
Ingesta de datasets: layout público de Elliptic, features de cuentas de
Ethereum y construcción de grafos k-NN.
"""

import re
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger
from scipy.spatial.distance import cdist
from sklearn.preprocessing import StandardScaler

from .model import (
    LABEL_ILLICIT,
    LABEL_LICIT,
    LABEL_UNKNOWN,
    DataFormatError,
    GraphError,
    ReferentialIntegrityError,
    TransactionGraph,
)

PathLike = Union[str, Path]

ELLIPTIC_FEATURES_FILE = "elliptic_txs_features.csv"
ELLIPTIC_CLASSES_FILE = "elliptic_txs_classes.csv"
ELLIPTIC_EDGELIST_FILE = "elliptic_txs_edgelist.csv"

# Clases del layout de Elliptic: "1" ilícita, "2" lícita
ELLIPTIC_CLASS_MAP = {"1": LABEL_ILLICIT, "2": LABEL_LICIT, "unknown": LABEL_UNKNOWN}

_PARSER_LINE = re.compile(r"line (\d+)")


def _has_header(path: Path) -> bool:
    """Detecta encabezado: el primer campo de la primera línea no es numérico."""
    with open(path, "r", encoding="utf-8") as f:
        first = f.readline().strip()
    if not first:
        return False
    token = first.split(",")[0].strip().strip('"')
    try:
        float(token)
        return False
    except ValueError:
        return True


def _read_csv(path: PathLike, dtype=None) -> Tuple[pd.DataFrame, int]:
    """
    Lee un CSV detectando el encabezado.

    Returns:
        (DataFrame, número de línea de la primera fila de datos)
    """
    path = Path(path)
    if not path.exists():
        raise GraphError(f"Archivo no encontrado: {path}")

    header = _has_header(path)
    first_line = 2 if header else 1
    try:
        df = pd.read_csv(path, header=0 if header else None, dtype=dtype)
    except pd.errors.EmptyDataError:
        return pd.DataFrame(), first_line
    except pd.errors.ParserError as e:
        match = _PARSER_LINE.search(str(e))
        line = int(match.group(1)) if match else None
        raise DataFormatError("fila mal formada", path=str(path), line=line) from e
    return df, first_line


def _numeric_frame(df: pd.DataFrame, path: PathLike, first_line: int) -> np.ndarray:
    """Convierte a numérico; la primera fila con valores inválidos produce un error."""
    numeric = df.apply(pd.to_numeric, errors="coerce")
    bad = numeric.isna().any(axis=1).to_numpy()
    if bad.any():
        row = int(np.argmax(bad))
        raise DataFormatError(
            "valor no numérico o faltante", path=str(path), line=row + first_line
        )
    return numeric.to_numpy()


def _lookup(
    index: pd.Index, ids: np.ndarray, path: PathLike, first_line: int, what: str
) -> np.ndarray:
    positions = index.get_indexer(ids)
    missing = positions < 0
    if missing.any():
        row = int(np.argmax(missing))
        raise ReferentialIntegrityError(
            f"{path}:{row + first_line}: {what} {int(ids[row])} no existe en el archivo de features"
        )
    return positions


def load_elliptic(
    features_path: PathLike, classes_path: PathLike, edgelist_path: PathLike
) -> TransactionGraph:
    """
    Carga el dataset de Elliptic desde sus tres CSV.

    Columnas de features: txId, time step, resto de features. txId y time step
    no forman parte de la matriz de aprendizaje; time step se conserva para el split.

    Raises:
        DataFormatError: Si una fila está mal formada (incluye número de línea)
        ReferentialIntegrityError: Si un txId de classes o edgelist no existe
    """
    logger.info(f"Cargando Elliptic desde {Path(features_path).parent}")

    features_df, first = _read_csv(features_path)
    if features_df.empty:
        raise DataFormatError("archivo de features vacío", path=str(features_path))
    if features_df.shape[1] < 2:
        raise DataFormatError(
            "se esperan al menos las columnas txId y time step", path=str(features_path)
        )
    values = _numeric_frame(features_df, features_path, first)

    tx_ids = values[:, 0].astype(np.int64)
    if np.any(values[:, 0] != tx_ids):
        raise DataFormatError("txId no entero", path=str(features_path))
    index = pd.Index(tx_ids)
    if not index.is_unique:
        row = int(np.argmax(index.duplicated()))
        raise DataFormatError(
            f"txId duplicado {tx_ids[row]}", path=str(features_path), line=row + first
        )
    time_step = values[:, 1].astype(np.int64)
    features = values[:, 2:].astype(np.float32)
    n = tx_ids.shape[0]

    # Clases
    labels = np.full(n, LABEL_UNKNOWN, dtype=np.int8)
    classes_df, first = _read_csv(classes_path, dtype=str)
    if not classes_df.empty:
        if classes_df.shape[1] < 2:
            raise DataFormatError("se esperan columnas txId y class", path=str(classes_path))
        class_ids = pd.to_numeric(classes_df.iloc[:, 0], errors="coerce")
        raw_class = classes_df.iloc[:, 1].astype(str).str.strip().str.lower()
        mapped = raw_class.map(ELLIPTIC_CLASS_MAP)
        bad = (class_ids.isna() | mapped.isna()).to_numpy()
        if bad.any():
            row = int(np.argmax(bad))
            raise DataFormatError(
                f"clase o txId inválido: {classes_df.iloc[row].tolist()}",
                path=str(classes_path),
                line=row + first,
            )
        positions = _lookup(
            index, class_ids.to_numpy().astype(np.int64), classes_path, first, "txId"
        )
        labels[positions] = mapped.to_numpy().astype(np.int8)

    # Aristas
    edges_df, first = _read_csv(edgelist_path)
    if edges_df.empty:
        src = np.empty(0, dtype=np.int64)
        dst = np.empty(0, dtype=np.int64)
    else:
        if edges_df.shape[1] < 2:
            raise DataFormatError("se esperan columnas txId1 y txId2", path=str(edgelist_path))
        pairs = _numeric_frame(edges_df.iloc[:, :2], edgelist_path, first).astype(np.int64)
        src = _lookup(index, pairs[:, 0], edgelist_path, first, "txId1")
        dst = _lookup(index, pairs[:, 1], edgelist_path, first, "txId2")

    graph = TransactionGraph(
        num_nodes=n,
        src=src,
        dst=dst,
        features=features,
        labels=labels,
        time_step=time_step,
        node_ids=tx_ids,
        metadata={"dataset": "elliptic"},
    )
    counts = graph.label_counts()
    logger.info(
        f"Elliptic cargado: {graph.num_nodes} nodos, {graph.num_edges} aristas, "
        f"d={graph.feature_dim}, ilícitos={counts['illicit']}, lícitos={counts['licit']}, "
        f"sin etiqueta={counts['unknown']}"
    )
    return graph


def load_elliptic_dir(data_dir: PathLike) -> TransactionGraph:
    """Carga Elliptic desde un directorio con los nombres de archivo públicos."""
    data_dir = Path(data_dir)
    return load_elliptic(
        data_dir / ELLIPTIC_FEATURES_FILE,
        data_dir / ELLIPTIC_CLASSES_FILE,
        data_dir / ELLIPTIC_EDGELIST_FILE,
    )


def build_knn_graph(
    features: np.ndarray,
    k: int,
    metric: str = "euclidean",
    labels: Optional[np.ndarray] = None,
    chunk_size: int = 1024,
    metadata: Optional[Dict[str, Any]] = None,
) -> TransactionGraph:
    """
    Construye un grafo dirigido k-NN: cada nodo apunta a sus k vecinos más
    cercanos (sin sí mismo). Los empates se resuelven por id ascendente.
    """
    if metric != "euclidean":
        raise GraphError(f"Métrica no soportada: {metric}")
    points = np.asarray(features, dtype=np.float64)
    if points.ndim != 2:
        raise GraphError("features debe ser una matriz 2D")
    n = points.shape[0]
    if k < 1:
        raise GraphError("k debe ser >= 1")
    if k >= n:
        raise GraphError(f"k={k} debe ser menor que el número de nodos ({n})")

    neighbors = np.empty((n, k), dtype=np.int64)
    for start in range(0, n, chunk_size):
        stop = min(start + chunk_size, n)
        dist = cdist(points[start:stop], points, metric="sqeuclidean")
        dist[np.arange(stop - start), np.arange(start, stop)] = np.inf
        neighbors[start:stop] = np.argsort(dist, axis=1, kind="stable")[:, :k]

    if labels is None:
        labels = np.full(n, LABEL_UNKNOWN, dtype=np.int8)

    logger.debug(f"Grafo k-NN construido: n={n}, k={k}, aristas={n * k}")
    return TransactionGraph(
        num_nodes=n,
        src=np.repeat(np.arange(n, dtype=np.int64), k),
        dst=neighbors.ravel(),
        features=points.astype(np.float32),
        labels=labels,
        metadata={"knn_k": k, **(metadata or {})},
    )


def load_ethereum(path: PathLike, k: int = 10, label_column: str = "FLAG") -> TransactionGraph:
    """
    Carga el dataset público de fraude en Ethereum (una fila por cuenta) y
    construye un grafo k-NN sobre las features numéricas estandarizadas.
    """
    path = Path(path)
    if not path.exists():
        raise GraphError(f"Archivo no encontrado: {path}")
    try:
        df = pd.read_csv(path)
    except pd.errors.ParserError as e:
        match = _PARSER_LINE.search(str(e))
        raise DataFormatError(
            "fila mal formada", path=str(path), line=int(match.group(1)) if match else None
        ) from e

    df.columns = [str(c).strip() for c in df.columns]
    if label_column not in df.columns:
        raise DataFormatError(f"columna de etiqueta '{label_column}' ausente", path=str(path))

    flags = pd.to_numeric(df[label_column], errors="coerce")
    bad = (flags.isna() | ~flags.isin([0, 1])).to_numpy()
    if bad.any():
        raise DataFormatError(
            f"valor de {label_column} inválido", path=str(path), line=int(np.argmax(bad)) + 2
        )
    labels = np.where(flags.to_numpy() == 1, LABEL_ILLICIT, LABEL_LICIT).astype(np.int8)

    ignored = {label_column, "Unnamed: 0", "Index", "index"}
    numeric = df.drop(columns=[c for c in df.columns if c in ignored])
    numeric = numeric.select_dtypes(include=[np.number]).fillna(0.0)
    if numeric.shape[1] == 0:
        raise DataFormatError("sin columnas numéricas de features", path=str(path))

    scaled = StandardScaler().fit_transform(numeric.to_numpy(dtype=np.float64))
    graph = build_knn_graph(scaled, k=k, labels=labels, metadata={"dataset": "ethereum"})
    logger.info(
        f"Ethereum cargado: {graph.num_nodes} cuentas, {graph.num_edges} aristas k-NN (k={k}), "
        f"d={graph.feature_dim}, fraudulentas={graph.label_counts()['illicit']}"
    )
    return graph

"""
Modelo de grafo de transacciones, ingesta de datasets y máscaras de evaluación.
"""

from .io import load_graph_text, save_graph_text
from .loaders import build_knn_graph, load_elliptic, load_elliptic_dir, load_ethereum
from .model import (
    LABEL_ILLICIT,
    LABEL_LICIT,
    LABEL_UNKNOWN,
    DataFormatError,
    GraphError,
    NodeMask,
    ReferentialIntegrityError,
    TransactionGraph,
)
from .splits import SplitRule, make_split, normalize_features
from .synthetic import generate_synthetic

__all__ = [
    "LABEL_ILLICIT",
    "LABEL_LICIT",
    "LABEL_UNKNOWN",
    "DataFormatError",
    "GraphError",
    "NodeMask",
    "ReferentialIntegrityError",
    "SplitRule",
    "TransactionGraph",
    "build_knn_graph",
    "generate_synthetic",
    "load_elliptic",
    "load_elliptic_dir",
    "load_ethereum",
    "load_graph_text",
    "make_split",
    "normalize_features",
    "save_graph_text",
]

"""
Particionado del grafo global en silos (VASPs).
"""

from .edgecut import balance_bounds, balanced_edgecut
from .louvain import CommunityLabeling, communities_to_silos, louvain
from .partitioner import (
    EdgeCutPartitioner,
    FilePartitioner,
    LouvainPartitioner,
    Partitioner,
    create_partitioner,
)
from .silos import (
    PartitionError,
    SiloPartition,
    cross_edge_fraction,
    read_partition_file,
    write_partition_file,
)

__all__ = [
    "CommunityLabeling",
    "EdgeCutPartitioner",
    "FilePartitioner",
    "LouvainPartitioner",
    "PartitionError",
    "Partitioner",
    "SiloPartition",
    "balance_bounds",
    "balanced_edgecut",
    "communities_to_silos",
    "create_partitioner",
    "cross_edge_fraction",
    "louvain",
    "read_partition_file",
    "write_partition_file",
]

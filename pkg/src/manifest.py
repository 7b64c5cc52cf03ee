"""
Manifiesto de ejecución: configuración, hashes de entradas, salidas y tiempos.
"""

import datetime
import hashlib
import json
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Union

import numpy as np
from loguru import logger

from . import __version__

PathLike = Union[str, Path]
MANIFEST_FILE = "manifest.json"


def sanitize_for_serialization(obj: Any) -> Any:
    """Convierte recursivamente tipos numpy, rutas y fechas a tipos base para JSON."""
    if isinstance(obj, dict):
        return {str(k): sanitize_for_serialization(v) for k, v in obj.items()}
    elif isinstance(obj, (list, tuple)):
        return [sanitize_for_serialization(v) for v in obj]
    elif isinstance(obj, np.ndarray):
        return obj.tolist()
    elif isinstance(obj, np.generic):
        return obj.item()
    elif isinstance(obj, Path):
        return str(obj)
    elif isinstance(obj, (datetime.date, datetime.datetime)):
        return obj.isoformat()
    return obj


def git_blob_hash(path: PathLike) -> str:
    """Hash estilo `git hash-object`: sha1 de "blob <len>\\0" + contenido."""
    data = Path(path).read_bytes()
    header = f"blob {len(data)}\0".encode("ascii")
    return hashlib.sha1(header + data).hexdigest()


@dataclass
class RunManifest:
    """Registro reproducible de una ejecución de la CLI."""

    command: str
    config: Dict[str, Any] = field(default_factory=dict)
    inputs: Dict[str, str] = field(default_factory=dict)
    outputs: Dict[str, Dict[str, str]] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)
    extra: Dict[str, Any] = field(default_factory=dict)
    _started: float = field(default_factory=time.perf_counter, init=False, repr=False)

    def add_inputs(self, paths: Iterable[Optional[PathLike]]):
        """Registra el hash de cada archivo de entrada existente."""
        for path in paths:
            if path is None:
                continue
            path = Path(path)
            if path.is_dir():
                for child in sorted(p for p in path.iterdir() if p.is_file()):
                    self.inputs[str(child)] = git_blob_hash(child)
            elif path.exists():
                self.inputs[str(path)] = git_blob_hash(path)

    def add_output(self, key: str, kind: str, path: PathLike):
        self.outputs.setdefault(str(key), {})[kind] = str(path)

    def record_time(self, name: str, seconds: float):
        self.timings[name] = float(seconds)

    def to_dict(self) -> Dict[str, Any]:
        return sanitize_for_serialization(
            {
                "command": self.command,
                "version": __version__,
                "python": platform.python_version(),
                "created_at": datetime.datetime.now().isoformat(timespec="seconds"),
                "config": self.config,
                "inputs": self.inputs,
                "outputs": self.outputs,
                "timings": {**self.timings, "total": time.perf_counter() - self._started},
                "extra": self.extra,
            }
        )

    def write(self, out_dir: PathLike) -> Path:
        path = Path(out_dir) / MANIFEST_FILE
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, ensure_ascii=False, indent=2, sort_keys=True)
        logger.info(f"Manifiesto escrito en {path}")
        return path

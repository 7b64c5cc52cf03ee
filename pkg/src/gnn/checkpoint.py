"""
Checkpoints de modelo.

Formato:
    FGVCKPT 1
    in_dim=<d> hidden=<h> [clave=valor ...]
    <nombre> <forma, p. ej. 332x128>     (una línea por parámetro, en orden)
    <línea vacía>
    longitud u64 little-endian | parámetros float32 little-endian
"""

import struct
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np
from loguru import logger

from .model import PARAM_NAMES, ModelError, SageModel

MAGIC = "FGVCKPT 1"
LENGTH_FIELD = struct.Struct("<Q")

PathLike = Union[str, Path]


def save_checkpoint(
    model: SageModel, path: PathLike, metadata: Optional[Dict[str, object]] = None
) -> Path:
    """Escribe el checkpoint. Los metadatos no pueden contener espacios."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    fields = {"in_dim": model.in_dim, "hidden": model.hidden}
    fields.update(metadata or {})
    lines = [MAGIC, " ".join(f"{k}={v}" for k, v in fields.items())]
    for name, shape in model.shapes().items():
        lines.append(f"{name} {'x'.join(str(s) for s in shape)}")
    header = ("\n".join(lines) + "\n\n").encode("utf-8")

    blob = model.flatten().astype("<f4").tobytes()
    with open(path, "wb") as f:
        f.write(header)
        f.write(LENGTH_FIELD.pack(len(blob)))
        f.write(blob)

    logger.debug(f"Checkpoint guardado en {path} ({model.num_parameters} parámetros)")
    return path


def load_checkpoint(path: PathLike) -> Tuple[SageModel, Dict[str, str]]:
    """
    Lee un checkpoint.

    Returns:
        (modelo, metadatos como strings)

    Raises:
        ModelError: Si el archivo no respeta el formato
    """
    path = Path(path)
    if not path.exists():
        raise ModelError(f"Checkpoint no encontrado: {path}")
    data = path.read_bytes()

    end = data.find(b"\n\n")
    if end < 0:
        raise ModelError(f"{path}: encabezado sin terminar")
    lines = data[:end].decode("utf-8").split("\n")
    if lines[0] != MAGIC:
        raise ModelError(f"{path}: no es un checkpoint ({lines[0]!r})")

    try:
        metadata = dict(item.split("=", 1) for item in lines[1].split())
        in_dim, hidden = int(metadata["in_dim"]), int(metadata["hidden"])
    except (IndexError, KeyError, ValueError) as e:
        raise ModelError(f"{path}: metadatos inválidos") from e

    model = SageModel(in_dim, hidden)
    declared = [line.split(" ", 1)[0] for line in lines[2:]]
    if tuple(declared) != PARAM_NAMES:
        raise ModelError(f"{path}: parámetros declarados {declared}")
    for line in lines[2:]:
        name, shape = line.split(" ", 1)
        expected = "x".join(str(s) for s in model.shapes()[name])
        if shape != expected:
            raise ModelError(f"{path}: forma de {name} {shape}, se esperaba {expected}")

    offset = end + 2
    if len(data) < offset + LENGTH_FIELD.size:
        raise ModelError(f"{path}: falta la longitud del blob")
    (length,) = LENGTH_FIELD.unpack_from(data, offset)
    offset += LENGTH_FIELD.size
    if length != model.num_parameters * 4 or len(data) != offset + length:
        raise ModelError(f"{path}: blob de {length} bytes inconsistente")

    vector = np.frombuffer(data, dtype="<f4", count=model.num_parameters, offset=offset)
    return model.unflatten(vector.astype(np.float64)), metadata

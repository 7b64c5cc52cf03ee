"""
Módulo de configuración de FedGraph-VASP.
Carga configuración desde YAML o texto plano `clave = valor` y variables de entorno.
"""

import os
import re
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml
from dotenv import load_dotenv
from loguru import logger

MODES = ("local", "fedavg", "fedgraph")
PARTITION_METHODS = ("louvain", "edgecut", "file")
SPLIT_KINDS = ("temporal", "random")
KEM_PROVIDERS = ("kyber-py", "oqs")
DATASET_KINDS = ("elliptic", "ethereum", "synthetic", "text")

# Alias aceptados en archivos y en la CLI
KEY_ALIASES = {"lambda": "lam", "k": "num_silos", "K": "num_silos", "seed": "seeds"}


class ConfigError(Exception):
    """Error en la configuración."""
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    """Parámetros de un experimento federado, con los valores del setup de referencia."""

    rounds: int = 50
    epochs: int = 3
    lam: float = 0.1
    num_silos: int = 3
    lr: float = 0.01
    weight_decay: float = 5e-4
    hidden: int = 128
    seeds: List[int] = field(default_factory=lambda: [42, 123, 456, 789, 2024])
    partition: str = "louvain"
    mode: str = "fedgraph"
    partition_file: Optional[str] = None
    partition_seed: int = 42
    louvain_resolution: float = 1.0
    edgecut_passes: int = 4
    split: str = "temporal"
    train_max_step: int = 34
    train_fraction: float = 0.7
    split_seed: int = 0
    workers: int = 1
    exchange: bool = True
    exchange_rounds: Optional[int] = None
    kem_provider: str = "kyber-py"

    @classmethod
    def field_names(cls) -> List[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_mapping(cls, mapping: Dict[str, Any]) -> "ExperimentConfig":
        """
        Construye la configuración desde un diccionario plano. Las claves
        desconocidas se reportan como advertencia.
        """
        known = set(cls.field_names())
        values: Dict[str, Any] = {}
        for key, value in (mapping or {}).items():
            name = KEY_ALIASES.get(key, key)
            if name not in known:
                logger.warning(f"Clave de experimento desconocida ignorada: {key}")
                continue
            values[name] = value
        if "seeds" in values:
            values["seeds"] = _as_int_list(values["seeds"])
        return cls(**values)

    def with_overrides(self, **overrides: Any) -> "ExperimentConfig":
        """Aplica overrides (los valores None se ignoran)."""
        changes = {}
        for key, value in overrides.items():
            if value is None:
                continue
            name = KEY_ALIASES.get(key, key)
            if name not in self.field_names():
                raise ConfigError(f"Parámetro desconocido: {key}")
            changes[name] = _as_int_list(value) if name == "seeds" else value
        return replace(self, **changes)

    def validate(self) -> "ExperimentConfig":
        """
        Raises:
            ConfigError: Con la lista de todos los campos inválidos
        """
        problems = []

        def check(condition: bool, message: str):
            if not condition:
                problems.append(f"  - {message}")

        check(self.rounds >= 0, "rounds debe ser >= 0")
        check(self.epochs >= 1, "epochs debe ser >= 1")
        check(self.lam >= 0, "lambda debe ser >= 0")
        check(self.num_silos >= 1, "k debe ser >= 1")
        check(self.lr > 0, "lr debe ser > 0")
        check(self.weight_decay >= 0, "weight_decay debe ser >= 0")
        check(self.hidden >= 1, "hidden debe ser >= 1")
        check(len(self.seeds) > 0, "seeds no puede estar vacío")
        check(self.mode in MODES, f"mode debe ser uno de {MODES}")
        check(self.partition in PARTITION_METHODS, f"partition debe ser uno de {PARTITION_METHODS}")
        check(
            self.partition != "file" or bool(self.partition_file),
            "partition=file requiere partition_file",
        )
        check(self.split in SPLIT_KINDS, f"split debe ser uno de {SPLIT_KINDS}")
        check(0 < self.train_fraction < 1, "train_fraction debe estar en (0, 1)")
        check(self.workers >= 1, "workers debe ser >= 1")
        check(self.louvain_resolution > 0, "louvain_resolution debe ser > 0")
        check(self.edgecut_passes >= 0, "edgecut_passes debe ser >= 0")
        check(
            self.exchange_rounds is None or self.exchange_rounds >= 0,
            "exchange_rounds debe ser >= 0",
        )
        check(self.kem_provider in KEM_PROVIDERS, f"kem_provider debe ser uno de {KEM_PROVIDERS}")

        if problems:
            raise ConfigError("Configuración de experimento inválida:\n" + "\n".join(problems))
        return self

    @property
    def exchanges_embeddings(self) -> bool:
        return self.mode == "fedgraph" and self.exchange

    def exchange_active(self, round: int) -> bool:
        """El intercambio está activo en la ronda `round` (1-based)."""
        if not self.exchanges_embeddings:
            return False
        return self.exchange_rounds is None or round <= self.exchange_rounds

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _as_int_list(value: Any) -> List[int]:
    if isinstance(value, str):
        parts = [p for p in re.split(r"[,\s]+", value.strip("[] ")) if p]
        return [int(p) for p in parts]
    if isinstance(value, (list, tuple)):
        return [int(v) for v in value]
    return [int(value)]


class Config:
    """Carga y gestiona la configuración del simulador."""

    def __init__(self, config_path: Optional[str] = None):
        """
        Inicializa la configuración.

        Args:
            config_path: Ruta a un YAML (.yaml/.yml) o a un archivo `clave = valor`.
                        Si no se especifica, busca en ./config/config.yaml
        """
        self._config: Dict[str, Any] = {}
        self._config_path = self._resolve_config_path(config_path)

        # Cargar variables de entorno desde .env
        self._load_env()

        if self._config_path.suffix.lower() in (".yaml", ".yml"):
            self._load_yaml()
        else:
            self._load_flat()

        self._config = self._resolve_env_vars()

        logger.info(f"Configuración cargada desde: {self._config_path}")

    def _resolve_config_path(self, config_path: Optional[str]) -> Path:
        """Resuelve la ruta del archivo de configuración."""
        if config_path:
            path = Path(config_path)
        else:
            candidates = [
                Path("./config/config.yaml"),
                Path("./config.yaml"),
                Path.home() / ".fgv" / "config.yaml",
            ]
            path = next((p for p in candidates if p.exists()), candidates[0])

        if not path.exists():
            raise ConfigError(f"Archivo de configuración no encontrado: {path}")

        return path.resolve()

    def _load_env(self):
        """Carga variables de entorno desde .env."""
        env_paths = [
            Path("./.env"),
            self._config_path.parent / ".env",
            Path.home() / ".fgv" / ".env",
        ]

        for env_path in env_paths:
            if env_path.exists():
                load_dotenv(env_path, override=False)
                logger.debug(f"Variables de entorno cargadas desde: {env_path}")
                return

    def _load_yaml(self):
        """Carga el archivo YAML de configuración."""
        try:
            with open(self._config_path, "r", encoding="utf-8") as f:
                self._config = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"Error parseando YAML: {e}")
        if not isinstance(self._config, dict):
            raise ConfigError("El YAML de configuración debe ser un mapeo")

    def _load_flat(self):
        """
        Carga un archivo `clave = valor` por línea. Las claves con puntos se
        anidan en secciones; los valores se tipan con YAML.
        """
        with open(self._config_path, "r", encoding="utf-8") as f:
            for number, raw in enumerate(f, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{self._config_path}:{number}: se esperaba 'clave = valor'")
                key, value = (part.strip() for part in line.split("=", 1))
                if not key:
                    raise ConfigError(f"{self._config_path}:{number}: clave vacía")
                try:
                    parsed = yaml.safe_load(value) if value else None
                except yaml.YAMLError as e:
                    raise ConfigError(f"{self._config_path}:{number}: valor inválido: {e}")

                section = self._config
                *parents, leaf = key.split(".")
                for parent in parents:
                    section = section.setdefault(parent, {})
                section[leaf] = parsed

    def _resolve_env_vars(self, obj: Any = None) -> Any:
        """
        Resuelve variables de entorno en formato ${VAR_NAME}.

        Args:
            obj: Objeto a procesar (dict, list, str)

        Returns:
            Objeto con variables resueltas
        """
        if obj is None:
            obj = self._config

        if isinstance(obj, dict):
            return {k: self._resolve_env_vars(v) for k, v in obj.items()}
        elif isinstance(obj, list):
            return [self._resolve_env_vars(item) for item in obj]
        elif isinstance(obj, str):
            # Patrón: ${VAR_NAME} o ${VAR_NAME:default}
            pattern = r"\$\{([^}:]+)(?::([^}]*))?\}"

            def replace_var(match):
                var_name = match.group(1)
                default = match.group(2)
                value = os.environ.get(var_name)

                if value is None and default is None:
                    logger.warning(f"Variable de entorno no definida: {var_name}")
                    return match.group(0)

                return value if value is not None else default

            resolved = re.sub(pattern, replace_var, obj)
            # Una referencia que ocupa todo el valor se tipa como YAML (rounds: ${FGV_ROUNDS:3})
            if resolved != obj and re.fullmatch(pattern, obj):
                try:
                    return yaml.safe_load(resolved)
                except yaml.YAMLError:
                    return resolved
            return resolved
        else:
            return obj

    @property
    def path(self) -> Path:
        return self._config_path

    def get(self, key: str, default: Any = None) -> Any:
        """
        Obtiene un valor de configuración usando notación de puntos.

        Example:
            config.get("dataset.kind", "elliptic")
        """
        value = self._config
        try:
            for k in key.split("."):
                value = value[k]
            return value
        except (KeyError, TypeError):
            return default

    def __getitem__(self, key: str) -> Any:
        return self._config[key]

    @property
    def logging(self) -> Dict[str, Any]:
        """Configuración de logging."""
        return self._config.get("logging", {}) or {}

    @property
    def dataset(self) -> Dict[str, Any]:
        """Configuración del dataset (kind, path, k, parámetros sintéticos)."""
        return self._config.get("dataset", {}) or {}

    @property
    def tunnel(self) -> Dict[str, Any]:
        return self._config.get("tunnel", {}) or {}

    @property
    def output(self) -> Dict[str, Any]:
        return self._config.get("output", {}) or {}

    def experiment(self) -> ExperimentConfig:
        """
        ExperimentConfig a partir de la sección `experiment` y de las claves
        de nivel superior con nombre de campo (formato plano).
        """
        names = set(ExperimentConfig.field_names()) | set(KEY_ALIASES)
        mapping = {k: v for k, v in self._config.items() if k in names}
        section = self._config.get("experiment", {}) or {}
        if not isinstance(section, dict):
            raise ConfigError("La sección experiment debe ser un mapeo")
        mapping.update(section)
        if "kem_provider" not in mapping and self.tunnel.get("kem_provider"):
            mapping["kem_provider"] = self.tunnel["kem_provider"]
        try:
            return ExperimentConfig.from_mapping(mapping)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Valor de experimento inválido: {e}")

    def validate(self) -> bool:
        """
        Valida la configuración completa.

        Raises:
            ConfigError: Si algún campo es inválido
        """
        kind = self.dataset.get("kind")
        if kind is not None and kind not in DATASET_KINDS:
            raise ConfigError(f"dataset.kind debe ser uno de {DATASET_KINDS}, no '{kind}'")
        self.experiment().validate()
        logger.info("Configuración validada correctamente")
        return True


def load_config(config_path: Optional[str] = None) -> Config:
    """
    Función helper para cargar configuración.

    Args:
        config_path: Ruta opcional al archivo de configuración

    Returns:
        Instancia de Config
    """
    return Config(config_path)

"""
Ataque de inversión: un regresor MLP intenta reconstruir las features
originales de un nodo a partir de su embedding compartido.
"""

import warnings
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Tuple

import numpy as np
from loguru import logger
from scipy.stats import pearsonr
from sklearn.exceptions import ConvergenceWarning
from sklearn.metrics import mean_squared_error, r2_score
from sklearn.model_selection import train_test_split
from sklearn.neural_network import MLPRegressor
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler

MIN_ROWS = 100
ATTACKER_HIDDEN = (256, 128)
ATTACKER_EPOCHS = 200
ATTACKER_LR = 1e-3


class AuditError(Exception):
    """Error en una auditoría de privacidad."""
    pass


@dataclass(frozen=True)
class InversionReport:
    mse: float
    r2: float
    pearson_mean: float
    hidden_widths: Tuple[int, ...] = ATTACKER_HIDDEN
    epochs: int = ATTACKER_EPOCHS
    learning_rate: float = ATTACKER_LR
    train_rows: int = 0
    test_rows: int = 0
    seed: int = 0
    excluded_features: List[int] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["hidden_widths"] = list(self.hidden_widths)
        return data


def _pearson_mean(y_true: np.ndarray, y_pred: np.ndarray) -> Tuple[float, List[int]]:
    """Media de la correlación por feature; las columnas constantes se excluyen."""
    values, excluded = [], []
    for j in range(y_true.shape[1]):
        if np.ptp(y_true[:, j]) == 0 or np.ptp(y_pred[:, j]) == 0:
            excluded.append(j)
            continue
        values.append(pearsonr(y_true[:, j], y_pred[:, j])[0])
    if excluded:
        logger.warning(
            f"{len(excluded)} features constantes excluidas del promedio de Pearson: "
            f"{excluded[:10]}"
        )
    return (float(np.mean(values)) if values else 0.0), excluded


def inversion_attack(
    embeddings: np.ndarray,
    features: np.ndarray,
    seed: int = 0,
    hidden: Tuple[int, ...] = ATTACKER_HIDDEN,
    epochs: int = ATTACKER_EPOCHS,
    test_size: float = 0.3,
) -> InversionReport:
    """
    Entrena el regresor embedding → features sobre un split 70/30 y reporta
    MSE, R² ponderado por varianza y Pearson medio en la parte de prueba.

    Raises:
        AuditError: Filas desalineadas o menos de 100 filas
    """
    x = np.asarray(embeddings, dtype=np.float64)
    y = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 2 or x.shape[0] != y.shape[0]:
        raise AuditError(f"Embeddings {x.shape} y features {y.shape} no están alineados")
    if x.shape[0] < MIN_ROWS:
        raise AuditError(f"El ataque de inversión requiere al menos {MIN_ROWS} filas")

    x_train, x_test, y_train, y_test = train_test_split(
        x, y, test_size=test_size, random_state=seed
    )
    regressor = make_pipeline(
        StandardScaler(),
        MLPRegressor(
            hidden_layer_sizes=tuple(hidden),
            activation="relu",
            solver="adam",
            learning_rate_init=ATTACKER_LR,
            max_iter=epochs,
            n_iter_no_change=epochs,
            tol=0.0,
            random_state=seed,
        ),
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        regressor.fit(x_train, y_train)

    prediction = regressor.predict(x_test).reshape(y_test.shape)
    pearson, excluded = _pearson_mean(y_test, prediction)
    report = InversionReport(
        mse=float(mean_squared_error(y_test, prediction)),
        r2=float(r2_score(y_test, prediction, multioutput="variance_weighted")),
        pearson_mean=pearson,
        hidden_widths=tuple(hidden),
        epochs=epochs,
        train_rows=int(x_train.shape[0]),
        test_rows=int(x_test.shape[0]),
        seed=seed,
        excluded_features=excluded,
    )
    logger.info(
        f"Inversión: R²={report.r2:.4f} MSE={report.mse:.4f} Pearson={report.pearson_mean:.4f}"
    )
    return report

"""
Optimizador Adam con weight decay desacoplado.
"""

from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from .model import ModelError, SageModel


@dataclass
class AdamState:
    """Momentos por parámetro, contador de pasos e hiperparámetros."""

    lr: float = 0.01
    weight_decay: float = 5e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def for_model(
        cls, model: SageModel, lr: float = 0.01, weight_decay: float = 5e-4
    ) -> "AdamState":
        state = cls(lr=lr, weight_decay=weight_decay)
        for name, param in model.params.items():
            state.m[name] = np.zeros_like(param)
            state.v[name] = np.zeros_like(param)
        return state


def adam_step(
    model: SageModel, grads: Dict[str, np.ndarray], state: AdamState
) -> Tuple[SageModel, AdamState]:
    """
    Un paso de Adam sobre el modelo (in-place):
    p ← p − lr · (m̂ / (√v̂ + ε) + wd · p)

    Raises:
        ModelError: Si las formas de gradientes o momentos no coinciden
    """
    for name, param in model.params.items():
        if name not in grads or grads[name].shape != param.shape:
            raise ModelError(f"Gradiente ausente o con forma inválida para {name}")
        if name not in state.m:
            state.m[name] = np.zeros_like(param)
            state.v[name] = np.zeros_like(param)
        if state.m[name].shape != param.shape:
            raise ModelError(f"El estado de Adam no corresponde al parámetro {name}")

    state.step += 1
    bias1 = 1.0 - state.beta1 ** state.step
    bias2 = 1.0 - state.beta2 ** state.step
    for name, param in model.params.items():
        g = grads[name]
        state.m[name] = state.beta1 * state.m[name] + (1.0 - state.beta1) * g
        state.v[name] = state.beta2 * state.v[name] + (1.0 - state.beta2) * g * g
        m_hat = state.m[name] / bias1
        v_hat = state.v[name] / bias2
        param -= state.lr * (m_hat / (np.sqrt(v_hat) + state.eps) + state.weight_decay * param)
    return model, state

"""
Otimizadores - Adam e SGD sobre MlpParams
"""

from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from core.autodiff import MlpParams, TapeGradients
from core.errors import ConfigurationError, OptimizerFault


@dataclass
class AdamState:
    """Acumuladores de primeiro e segundo momento, zerados na criação."""
    lr: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.lr <= 0:
            raise ConfigurationError(f"Taxa de aprendizado deve ser > 0, recebido {self.lr}")

    @classmethod
    def for_tensors(cls, tensors: Dict[str, np.ndarray], lr: float, **kwargs) -> "AdamState":
        return cls(lr=lr,
                   m={k: np.zeros_like(v) for k, v in tensors.items()},
                   v={k: np.zeros_like(v) for k, v in tensors.items()},
                   **kwargs)

    @classmethod
    def for_params(cls, params: MlpParams, lr: float, **kwargs) -> "AdamState":
        return cls.for_tensors(params.tensors, lr, **kwargs)


def adam_update_tensors(tensors: Dict[str, np.ndarray], grads: Dict[str, np.ndarray],
                        state: AdamState) -> AdamState:
    """Passo de Adam com correção de viés, aplicado in-place nos tensores."""
    if set(grads) != set(tensors) or set(state.m) != set(tensors):
        raise ConfigurationError("Gradientes/estado não congruentes com os parâmetros")
    for name, g in grads.items():
        if g.shape != tensors[name].shape:
            raise ConfigurationError(f"{name}: gradiente {g.shape}, parâmetro {tensors[name].shape}")
        if not np.all(np.isfinite(g)):
            raise OptimizerFault(f"Gradiente não finito em {name}")

    state.step += 1
    bc1 = 1.0 - state.beta1 ** state.step
    bc2 = 1.0 - state.beta2 ** state.step
    for name, g in grads.items():
        state.m[name] = state.beta1 * state.m[name] + (1.0 - state.beta1) * g
        state.v[name] = state.beta2 * state.v[name] + (1.0 - state.beta2) * g * g
        m_hat = state.m[name] / bc1
        v_hat = state.v[name] / bc2
        tensors[name] -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return state


def adam_step(params: MlpParams, grads: TapeGradients, state: AdamState) -> Tuple[MlpParams, AdamState]:
    """
    Um passo de Adam.

    Raises:
        OptimizerFault: gradientes não finitos (nunca são cortados em silêncio)
    """
    adam_update_tensors(params.tensors, grads.tensors, state)
    params.mark_modified()
    return params, state


def sgd_step(params: MlpParams, grads: TapeGradients, lr: float) -> MlpParams:
    """Passo de gradiente simples θ ← θ − lr·g."""
    if not grads.is_finite():
        raise OptimizerFault("Gradiente não finito no SGD")
    for name, g in grads.tensors.items():
        params.tensors[name] -= lr * g
    params.mark_modified()
    return params

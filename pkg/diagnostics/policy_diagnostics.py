"""
Policy Diagnostics - Histogramas de ação e campo de gradiente de Q
"""

import csv
import os
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from core.errors import ConfigurationError
from envs.dataset import Trajectory
from interfaces.rl_interfaces import IQFunction


@dataclass
class ActionHistogram:
    """
    Frequências normalizadas por dimensão de ação.

    bang_bang: massa nos dois bins extremos, por dimensão.
    """
    edges: np.ndarray
    frequencies: np.ndarray
    bang_bang: np.ndarray
    samples: int

    @property
    def bang_bang_index(self) -> float:
        return float(np.mean(self.bang_bang))

    def to_csv(self, path: str, label: str = ""):
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["label", "dim", "bin", "left", "right", "frequency"])
            for dim, row in enumerate(self.frequencies):
                for b, value in enumerate(row):
                    writer.writerow([label, dim, b, repr(float(self.edges[b])),
                                     repr(float(self.edges[b + 1])), repr(float(value))])


def action_histogram(trajectories: Union[Sequence[Trajectory], np.ndarray], bins: int = 20,
                     low: float = -1.0, high: float = 1.0) -> ActionHistogram:
    """
    Histograma por dimensão das ações executadas.

    Args:
        trajectories: Trajetórias (ou matriz de ações [n×act])
        bins: Bins por dimensão, igualmente espaçados em [low, high]

    Raises:
        ConfigurationError: Nenhuma ação
    """
    if isinstance(trajectories, np.ndarray):
        actions = np.atleast_2d(trajectories)
    else:
        pieces = [t.actions for t in trajectories if t.length > 0]
        actions = np.concatenate(pieces) if pieces else np.empty((0, 0))
    if actions.size == 0:
        raise ConfigurationError("Histograma de ações sem nenhuma ação")
    if bins < 2:
        raise ConfigurationError(f"São necessários ao menos 2 bins, recebido {bins}")

    edges = np.linspace(low, high, bins + 1)
    clipped = np.clip(actions, low, high)
    frequencies = np.stack([np.histogram(clipped[:, d], bins=edges)[0] for d in range(actions.shape[1])])
    frequencies = frequencies / len(actions)
    return ActionHistogram(edges=edges, frequencies=frequencies,
                           bang_bang=frequencies[:, 0] + frequencies[:, -1], samples=len(actions))


@dataclass
class GradientField:
    """Grade sobre duas dimensões de ação: Q e ∂Q/∂a nessas dimensões."""
    dims: Tuple[int, int]
    xs: np.ndarray
    ys: np.ndarray
    q: np.ndarray          # [ny × nx]
    gradient: np.ndarray   # [ny × nx × 2]

    def to_csv(self, path: str):
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"a{self.dims[0]}", f"a{self.dims[1]}", "q", "dq_dx", "dq_dy"])
            for iy, y in enumerate(self.ys):
                for ix, x in enumerate(self.xs):
                    writer.writerow([repr(float(x)), repr(float(y)), repr(float(self.q[iy, ix])),
                                     repr(float(self.gradient[iy, ix, 0])),
                                     repr(float(self.gradient[iy, ix, 1]))])


def q_action_gradient_field(critic: IQFunction, s: np.ndarray, base_action: np.ndarray,
                            dims: Tuple[int, int] = (0, 1), grid: int = 21,
                            low: float = -1.0, high: float = 1.0) -> GradientField:
    """
    ∂Q/∂a exato nas dimensões `dims` sobre uma grade grid×grid.

    Args:
        critic: Função Q
        s: Estado fixo
        base_action: Ação das dimensões não varridas (média da política)
    """
    base_action = np.asarray(base_action, dtype=np.float64).ravel()
    if len(set(dims)) != 2 or max(dims) >= len(base_action):
        raise ConfigurationError(f"Dimensões inválidas {dims} para ação de tamanho {len(base_action)}")
    xs = np.linspace(low, high, grid)
    ys = np.linspace(low, high, grid)
    gx, gy = np.meshgrid(xs, ys)
    actions = np.tile(base_action, (gx.size, 1))
    actions[:, dims[0]] = gx.ravel()
    actions[:, dims[1]] = gy.ravel()
    states = np.tile(np.asarray(s, dtype=np.float64).ravel(), (gx.size, 1))

    q, grad = critic.q_and_action_grad(states, actions)
    gradient = np.stack([grad[:, dims[0]], grad[:, dims[1]]], axis=1).reshape(grid, grid, 2)
    return GradientField(dims=tuple(dims), xs=xs, ys=ys, q=np.asarray(q).reshape(grid, grid), gradient=gradient)


def finite_difference_field(critic: IQFunction, s: np.ndarray, field: GradientField,
                            base_action: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Mesma grade, gradiente por diferenças centrais (referência)."""
    base_action = np.asarray(base_action, dtype=np.float64).ravel()
    result = np.zeros_like(field.gradient)
    state = np.atleast_2d(np.asarray(s, dtype=np.float64).ravel())
    for iy, y in enumerate(field.ys):
        for ix, x in enumerate(field.xs):
            a = base_action.copy()
            a[field.dims[0]], a[field.dims[1]] = x, y
            for k, dim in enumerate(field.dims):
                up, down = a.copy(), a.copy()
                up[dim] += eps
                down[dim] -= eps
                diff = critic.q_values(state, up[None, :])[0] - critic.q_values(state, down[None, :])[0]
                result[iy, ix, k] = diff / (2.0 * eps)
    return result

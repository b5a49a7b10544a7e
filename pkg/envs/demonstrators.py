"""
Demonstrators - Controladores roteirizados e política aleatória
===============================================================
- ReacherDemonstrator: clip(K(x_goal − x_curr), −1, 1), K = 2.0
- GraspDemonstrator: três fases (descer até o item, fechar, levantar) com
  ruído gaussiano pequeno na velocidade
- RandomPolicy: ações uniformes nos limites do ambiente

Os demonstradores leem o estado interno do simulador (act_state), o que
permite demonstrar também a variante por imagem do reacher.
"""

from typing import Optional

import numpy as np

from core.errors import ConfigurationError
from envs.grasp import LIFT_THRESHOLD
from envs.reacher import DEFAULT_GAIN, reacher_expert_action
from interfaces.rl_interfaces import EnvState, IActionSource

GRASP_GAIN = 10.0
GRASP_NOISE = 0.05
GRIP_DISTANCE = 0.03
HOLD_HEIGHT = LIFT_THRESHOLD + 0.25


class ReacherDemonstrator(IActionSource):
    """Controlador proporcional saturado do reacher."""

    name = "reacher_linear_gain"

    def __init__(self, gain: float = DEFAULT_GAIN):
        self.gain = gain

    def act_state(self, state: EnvState, rng: np.random.Generator,
                  deterministic: bool = False) -> np.ndarray:
        return reacher_expert_action(state.sim["x_curr"], state.sim["x_goal"], self.gain)

    def act(self, observation: np.ndarray, rng: np.random.Generator,
            deterministic: bool = False) -> np.ndarray:
        """Observação por estado: [x_curr, delta]."""
        return np.clip(self.gain * np.asarray(observation[2:4], dtype=np.float64), -1.0, 1.0)


class GraspDemonstrator(IActionSource):
    """
    Demonstrador de três fases para o grasp.

    1. Aproxima a garra do item com ganho alto (garra aberta)
    2. Fecha a garra quando a distância cai abaixo de GRIP_DISTANCE
    3. Levanta até HOLD_HEIGHT e segura até o fim do episódio
    """

    name = "grasp_scripted"

    def __init__(self, noise: float = GRASP_NOISE, gain: float = GRASP_GAIN):
        self.noise = noise
        self.gain = gain

    def _plan(self, gripper: np.ndarray, item: np.ndarray, holding: bool) -> np.ndarray:
        if holding:
            velocity = np.array([0.0, np.clip(self.gain * (HOLD_HEIGHT - gripper[1]), -1.0, 1.0)])
            return np.array([velocity[0], velocity[1], 1.0])
        delta = item - gripper
        velocity = np.clip(self.gain * delta, -1.0, 1.0)
        grip = 1.0 if np.linalg.norm(delta) < GRIP_DISTANCE else -1.0
        return np.array([velocity[0], velocity[1], grip])

    def _perturb(self, action: np.ndarray, rng: np.random.Generator, deterministic: bool) -> np.ndarray:
        if deterministic or self.noise <= 0.0:
            return action
        action = action.copy()
        action[:2] = np.clip(action[:2] + rng.normal(0.0, self.noise, size=2), -1.0, 1.0)
        return action

    def act_state(self, state: EnvState, rng: np.random.Generator,
                  deterministic: bool = False) -> np.ndarray:
        sim = state.sim
        return self._perturb(self._plan(sim["gripper"], sim["item"], sim["holding"]), rng, deterministic)

    def act(self, observation: np.ndarray, rng: np.random.Generator,
            deterministic: bool = False) -> np.ndarray:
        obs = np.asarray(observation, dtype=np.float64)
        return self._perturb(self._plan(obs[0:2], obs[2:4], obs[4] > 0.5), rng, deterministic)


class RandomPolicy(IActionSource):
    """Ações uniformes em [low, high]."""

    name = "uniform_random"

    def __init__(self, act_dim: int, low: Optional[np.ndarray] = None, high: Optional[np.ndarray] = None):
        self.act_dim = act_dim
        self.low = -np.ones(act_dim) if low is None else np.asarray(low, dtype=np.float64)
        self.high = np.ones(act_dim) if high is None else np.asarray(high, dtype=np.float64)

    def act(self, observation: np.ndarray, rng: np.random.Generator,
            deterministic: bool = False) -> np.ndarray:
        return rng.uniform(self.low, self.high)


def demonstrator_for(env_name: str, gain: float = DEFAULT_GAIN, noise: float = GRASP_NOISE) -> IActionSource:
    """Demonstrador roteirizado apropriado ao ambiente."""
    if env_name.startswith("reacher"):
        return ReacherDemonstrator(gain=gain)
    if env_name == "grasp":
        return GraspDemonstrator(noise=noise)
    raise ConfigurationError(f"Sem demonstrador para o ambiente '{env_name}'")

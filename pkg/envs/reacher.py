"""
Reacher 2D - Simulação cinemática de um alcance planar
======================================================
Ponto no plano [-1, 1]² integra a velocidade (ação cortada em [-1, 1]²)
com passo dt fixo. Recompensa moldada: −‖x_goal − x_curr‖ por passo.

Observação (variante "state", 4 valores):
    [x_curr(2), x_goal − x_curr(2)]
Observação (variante "image", 256 valores):
    seta 16×16 achatada (envs.rendering), depende só do delta

Sucesso: distância final < SUCCESS_RADIUS.
"""

import logging
from typing import Optional

import numpy as np

from envs.rendering import IMAGE_SIZE, render_arrow
from interfaces.rl_interfaces import EnvState, IEnvironment, StepResult

DEFAULT_HORIZON = 50
DEFAULT_DT = 0.1
DEFAULT_GAIN = 2.0
WORKSPACE = 1.0
GOAL_REGION = 0.8
SUCCESS_RADIUS = 0.05

OBSERVATIONS = ("state", "image")


def reacher_expert_action(x_curr: np.ndarray, x_goal: np.ndarray, K: float = DEFAULT_GAIN) -> np.ndarray:
    """clip(K(x_goal − x_curr), −1, 1), elemento a elemento."""
    delta = np.asarray(x_goal, dtype=np.float64) - np.asarray(x_curr, dtype=np.float64)
    return np.clip(K * delta, -1.0, 1.0)


class ReacherEnv(IEnvironment):
    """
    Reacher 2D com observação por estado ou por imagem.

    Características:
    - Alvo e posição inicial sorteados pela semente do episódio
    - Nunca gera fault; o episódio sempre dura T passos
    """

    def __init__(self, horizon: int = DEFAULT_HORIZON, dt: float = DEFAULT_DT,
                 observation: str = "state", logger: Optional[logging.Logger] = None):
        if observation not in OBSERVATIONS:
            raise ValueError(f"Observação desconhecida: {observation}")
        self.horizon = int(horizon)
        self.dt = float(dt)
        self.observation = observation
        self.name = "reacher" if observation == "state" else "reacher_image"
        self.obs_dim = 4 if observation == "state" else IMAGE_SIZE * IMAGE_SIZE
        self.act_dim = 2
        self.logger = logger or logging.getLogger(__name__)

    # ========== OBSERVAÇÃO ==========

    def _observe(self, x_curr: np.ndarray, x_goal: np.ndarray) -> np.ndarray:
        delta = x_goal - x_curr
        if self.observation == "image":
            return render_arrow(delta)
        return np.concatenate([x_curr, delta])

    def render(self, state: EnvState) -> np.ndarray:
        """Imagem da seta para qualquer estado (independe da variante)."""
        return render_arrow(state.sim["x_goal"] - state.sim["x_curr"])

    # ========== DINÂMICA ==========

    def reset(self, seed: int, previous: Optional[EnvState] = None) -> EnvState:
        rng = np.random.default_rng(seed)
        x_curr = rng.uniform(-WORKSPACE, WORKSPACE, size=2)
        x_goal = rng.uniform(-GOAL_REGION, GOAL_REGION, size=2)
        return EnvState(
            observation=self._observe(x_curr, x_goal),
            t=0,
            horizon=self.horizon,
            sim={"x_curr": x_curr, "x_goal": x_goal},
        )

    def step(self, state: EnvState, action: np.ndarray) -> StepResult:
        action = np.clip(np.asarray(action, dtype=np.float64), -1.0, 1.0)
        x_goal = state.sim["x_goal"]
        x_curr = np.clip(state.sim["x_curr"] + self.dt * action, -WORKSPACE, WORKSPACE)
        distance = float(np.linalg.norm(x_goal - x_curr))
        t = state.t + 1
        next_state = EnvState(
            observation=self._observe(x_curr, x_goal),
            t=t,
            horizon=self.horizon,
            sim={"x_curr": x_curr, "x_goal": x_goal},
        )
        return StepResult(
            observation=next_state.observation,
            reward=-distance,
            truncated=t >= self.horizon,
            fault=False,
            state=next_state,
            info={"distance": distance},
        )

    def is_success(self, state: EnvState, episode_return: float) -> bool:
        return float(np.linalg.norm(state.sim["x_goal"] - state.sim["x_curr"])) < SUCCESS_RADIUS


def reacher_reset(seed: int, horizon: int = DEFAULT_HORIZON, observation: str = "state") -> EnvState:
    return ReacherEnv(horizon=horizon, observation=observation).reset(seed)


def reacher_step(state: EnvState, action: np.ndarray, observation: str = "state") -> StepResult:
    return ReacherEnv(horizon=state.horizon, observation=observation).step(state, action)


def reacher_render_arrow(state: EnvState) -> np.ndarray:
    return render_arrow(state.sim["x_goal"] - state.sim["x_curr"])

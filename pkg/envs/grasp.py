"""
Grasp 2D - Pegar um item na caixa e segurá-lo no alto
=====================================================
Garra pontual num plano vertical [0, 1]² (x horizontal, y altura). Uma
caixa ocupa BIN_X × [0, BIN_TOP]; um item repousa no fundo da caixa.

Ação (3 valores, cortados em [-1, 1]):
    [vx, vy, grip]  velocidade planar e comando da garra (grip > 0 fecha)

Observação (6 valores):
    [garra_x, garra_y, item_x, item_y, segurando(0/1), t/T]

Regras:
- A garra fecha no item somente se estiver a menos de GRAB_RADIUS dele
- Recompensa 1 por passo enquanto o item segurado estiver acima de
  LIFT_THRESHOLD, senão 0; o episódio não termina no sucesso
- Sair do espaço de trabalho gera fault (análogo da parada de proteção)
  e trunca o episódio; sem fault o episódio dura exatamente T passos
- Item solto cai até o fundo na mesma coordenada x
- O item só é re-sorteado no reset após um episódio bem-sucedido
"""

import logging
from typing import Optional

import numpy as np

from interfaces.rl_interfaces import EnvState, IEnvironment, StepResult

DEFAULT_HORIZON = 60
MAX_SPEED = 0.05
GRAB_RADIUS = 0.05
BIN_X = (0.3, 0.7)
BIN_TOP = 0.3
LIFT_THRESHOLD = BIN_TOP + 0.2
ITEM_REST_Y = 0.02
ITEM_X_RANGE = (0.35, 0.65)
START_Y = 0.85
START_X_JITTER = 0.1


class GraspEnv(IEnvironment):
    """Ambiente de pegar-e-levantar com fault por limite do espaço de trabalho."""

    def __init__(self, horizon: int = DEFAULT_HORIZON, logger: Optional[logging.Logger] = None):
        self.horizon = int(horizon)
        self.name = "grasp"
        self.sparse_reward = True
        self.obs_dim = 6
        self.act_dim = 3
        self.logger = logger or logging.getLogger(__name__)

    def _observe(self, gripper: np.ndarray, item: np.ndarray, holding: bool, t: int) -> np.ndarray:
        return np.array([gripper[0], gripper[1], item[0], item[1], float(holding), t / self.horizon])

    def reset(self, seed: int, previous: Optional[EnvState] = None) -> EnvState:
        """
        Novo episódio.

        Se `previous` terminou sem sucesso, o item continua onde ficou
        (preso dentro da faixa da caixa); caso contrário é re-sorteado.
        """
        rng = np.random.default_rng(seed)
        gripper = np.array([0.5 + rng.uniform(-START_X_JITTER, START_X_JITTER), START_Y])
        item = np.array([rng.uniform(*ITEM_X_RANGE), ITEM_REST_Y])
        if previous is not None and not previous.sim.get("succeeded", False):
            item = np.array([np.clip(previous.sim["item"][0], *ITEM_X_RANGE), ITEM_REST_Y])
            self.logger.debug(f"[ENV] Item mantido em x={item[0]:.3f} após tentativa sem sucesso")
        return EnvState(
            observation=self._observe(gripper, item, False, 0),
            t=0,
            horizon=self.horizon,
            sim={"gripper": gripper, "item": item, "holding": False, "succeeded": False},
        )

    def step(self, state: EnvState, action: np.ndarray) -> StepResult:
        action = np.clip(np.asarray(action, dtype=np.float64), -1.0, 1.0)
        sim = state.sim
        gripper = sim["gripper"] + MAX_SPEED * action[:2]
        fault = bool(np.any(gripper < 0.0) or np.any(gripper > 1.0))
        gripper = np.clip(gripper, 0.0, 1.0)

        holding = sim["holding"]
        item = sim["item"].copy()
        if action[2] > 0.0:
            if not holding and np.linalg.norm(gripper - item) < GRAB_RADIUS:
                holding = True
        elif holding:
            holding = False
            item = np.array([item[0], ITEM_REST_Y])
        if holding:
            item = gripper.copy()

        reward = 1.0 if holding and item[1] > LIFT_THRESHOLD else 0.0
        t = state.t + 1
        next_state = EnvState(
            observation=self._observe(gripper, item, holding, t),
            t=t,
            horizon=self.horizon,
            sim={"gripper": gripper, "item": item, "holding": holding,
                 "succeeded": sim["succeeded"] or reward > 0.0},
            fault=fault,
        )
        if fault:
            self.logger.debug(f"[ENV] Fault no passo {t}: garra fora do espaço de trabalho")
        return StepResult(
            observation=next_state.observation,
            reward=reward,
            truncated=fault or t >= self.horizon,
            fault=fault,
            state=next_state,
            info={"holding": holding},
        )

    def is_success(self, state: EnvState, episode_return: float) -> bool:
        return episode_return > 0.0


def grasp_reset(seed: int, horizon: int = DEFAULT_HORIZON) -> EnvState:
    return GraspEnv(horizon=horizon).reset(seed)


def grasp_step(state: EnvState, action: np.ndarray) -> StepResult:
    return GraspEnv(horizon=state.horizon).step(state, action)

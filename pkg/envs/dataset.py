"""
Dataset - Trajetórias, rollouts e arquivos de demonstração
==========================================================
Formato do arquivo: JSON-lines, um registro por trajetória com
observações, ações, recompensas, flag de fault e metadados (ambiente,
semente, demonstrador, horizonte).
"""

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from core.errors import CollectionError
from interfaces.rl_interfaces import EnvState, IActionSource, IEnvironment

logger = logging.getLogger(__name__)


@dataclass
class Trajectory:
    """
    Episódio truncado.

    observations: [L+1 × obs_dim] (inclui a observação final)
    actions: [L × act_dim]
    rewards: [L]
    """
    observations: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    fault: bool = False
    success: bool = False
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def length(self) -> int:
        return int(len(self.rewards))

    @property
    def episode_return(self) -> float:
        return float(np.sum(self.rewards))

    def to_record(self) -> Dict[str, Any]:
        return {
            "observations": self.observations.tolist(),
            "actions": self.actions.tolist(),
            "rewards": self.rewards.tolist(),
            "fault": bool(self.fault),
            "success": bool(self.success),
            "metadata": self.metadata,
        }

    @classmethod
    def from_record(cls, record: Dict[str, Any]) -> "Trajectory":
        return cls(
            observations=np.array(record["observations"], dtype=np.float64),
            actions=np.array(record["actions"], dtype=np.float64),
            rewards=np.array(record["rewards"], dtype=np.float64),
            fault=bool(record["fault"]),
            success=bool(record["success"]),
            metadata=dict(record.get("metadata", {})),
        )


def choose_action(source: IActionSource, state: EnvState, rng: np.random.Generator,
                  deterministic: bool = False) -> np.ndarray:
    """Usa o estado interno quando a fonte sabe lê-lo (demonstradores)."""
    if hasattr(source, "act_state"):
        return source.act_state(state, rng, deterministic)
    return source.act(state.observation, rng, deterministic)


def rollout(env: IEnvironment, source: IActionSource, seed: int, rng: np.random.Generator,
            deterministic: bool = False, previous: Optional[EnvState] = None,
            horizon: Optional[int] = None) -> Tuple[Trajectory, EnvState]:
    """
    Executa um episódio completo.

    Args:
        env: Ambiente
        source: Política ou demonstrador
        seed: Semente do reset
        rng: Gerador para o ruído da política
        deterministic: Ação média / sem ruído
        previous: Estado final do episódio anterior
        horizon: Corta o episódio antes de env.horizon

    Returns:
        (trajetória, estado final)
    """
    limit = env.horizon if horizon is None else min(horizon, env.horizon)
    state = env.reset(seed, previous)
    observations = [state.observation]
    actions, rewards = [], []
    fault = False
    while state.t < limit:
        action = np.asarray(choose_action(source, state, rng, deterministic), dtype=np.float64)
        result = env.step(state, action)
        actions.append(np.clip(action, env.action_low, env.action_high))
        rewards.append(result.reward)
        observations.append(result.observation)
        state = result.state
        if result.fault:
            fault = True
            break

    rewards_arr = np.array(rewards, dtype=np.float64)
    trajectory = Trajectory(
        observations=np.array(observations, dtype=np.float64),
        actions=np.array(actions, dtype=np.float64).reshape(len(actions), env.act_dim),
        rewards=rewards_arr,
        fault=fault,
        success=env.is_success(state, float(rewards_arr.sum())),
        metadata={"env": env.name, "seed": int(seed), "source": getattr(source, "name", "policy"),
                  "horizon": int(limit)},
    )
    return trajectory, state


def collect_demonstrations(env: IEnvironment, policy: IActionSource, M: int, T: Optional[int] = None,
                           success_filter: bool = True, seed: int = 0,
                           retry_budget: Optional[int] = None) -> List[Trajectory]:
    """
    Coleta M trajetórias.

    Args:
        env: Ambiente
        policy: Demonstrador ou política
        M: Número de trajetórias
        T: Horizonte (padrão: o do ambiente)
        success_filter: Descarta trajetórias com retorno 0
        seed: Semente base; a tentativa k usa reset seed*100000 + k
        retry_budget: Máximo de tentativas (padrão 3M + 10)

    Raises:
        CollectionError: Se o orçamento de tentativas acabar
    """
    budget = retry_budget if retry_budget is not None else 3 * M + 10
    dataset: List[Trajectory] = []
    attempt = 0
    while len(dataset) < M:
        if attempt >= budget:
            raise CollectionError(
                f"Demonstrador '{getattr(policy, 'name', 'policy')}' produziu {len(dataset)}/{M} "
                f"trajetórias em {budget} tentativas"
            )
        rng = np.random.default_rng([seed, attempt])
        trajectory, _ = rollout(env, policy, seed * 100_000 + attempt, rng, horizon=T)
        attempt += 1
        if success_filter and not trajectory.episode_return > 0.0:
            continue
        trajectory.metadata.update({"demonstrator": getattr(policy, "name", "policy"),
                                    "collection_seed": int(seed), "attempt": attempt - 1})
        dataset.append(trajectory)

    logger.info(f"[DATASET] {len(dataset)} trajetórias coletadas em {attempt} tentativas "
                f"({env.name}, filtro de sucesso={success_filter})")
    return dataset


def save_dataset(path: str, trajectories: List[Trajectory]):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for trajectory in trajectories:
            fh.write(json.dumps(trajectory.to_record()) + "\n")
    logger.info(f"[DATASET] {len(trajectories)} trajetórias gravadas em {path}")


def load_dataset(path: str) -> List[Trajectory]:
    trajectories = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                trajectories.append(Trajectory.from_record(json.loads(line)))
    logger.info(f"[DATASET] {len(trajectories)} trajetórias lidas de {path}")
    return trajectories

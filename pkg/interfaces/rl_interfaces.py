"""
RL Interfaces - Contratos de Interfaces do Sistema
==================================================
Define interfaces abstratas para os componentes principais:
- IEnvironment: ambientes com episódios truncados
- IActionSource: qualquer coisa que escolhe ações (política, demonstrador)
- IQFunction: funções Q inspecionáveis pelos diagnósticos

E os tipos trocados entre ambiente e laço de treino (EnvState, StepResult).
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np


# ========== TIPOS ==========

@dataclass
class EnvState:
    """
    Estado de um ambiente.

    observation: vetor finito (layout documentado em cada ambiente)
    sim: estado interno do simulador
    t: passo atual em [0, horizon]
    """
    observation: np.ndarray
    t: int
    horizon: int
    sim: Dict[str, Any] = field(default_factory=dict)
    fault: bool = False

    @property
    def finished(self) -> bool:
        return self.t >= self.horizon or self.fault


@dataclass
class StepResult:
    """Resultado de um passo; truncated é verdadeiro sse t = T ou fault."""
    observation: np.ndarray
    reward: float
    truncated: bool
    fault: bool
    state: EnvState
    info: Dict[str, Any] = field(default_factory=dict)


# ========== INTERFACE: ENVIRONMENT ==========

class IEnvironment(ABC):
    """
    Interface para ambientes de controle contínuo.
    Determinísticos dado (semente, sequência de ações).
    """

    name: str
    obs_dim: int
    act_dim: int
    horizon: int
    # Recompensa esparsa em {0, 1}: "retorno > 0" vale como sucesso
    sparse_reward: bool = False

    @property
    def action_low(self) -> np.ndarray:
        return -np.ones(self.act_dim)

    @property
    def action_high(self) -> np.ndarray:
        return np.ones(self.act_dim)

    @abstractmethod
    def reset(self, seed: int, previous: Optional[EnvState] = None) -> EnvState:
        """
        Inicia um episódio.

        Args:
            seed: Semente do episódio
            previous: Estado final do episódio anterior (ambientes que
                preservam parte da cena entre tentativas)

        Returns:
            Estado inicial (t = 0)
        """
        pass

    @abstractmethod
    def step(self, state: EnvState, action: np.ndarray) -> StepResult:
        """
        Avança um passo.

        Args:
            state: Estado atual (não é modificado)
            action: Ação finita; valores fora dos limites são cortados

        Returns:
            StepResult com o próximo estado
        """
        pass

    @abstractmethod
    def is_success(self, state: EnvState, episode_return: float) -> bool:
        """Critério de sucesso do episódio terminado em `state`."""
        pass


# ========== INTERFACE: ACTION SOURCE ==========

class IActionSource(ABC):
    """Interface para políticas e demonstradores."""

    name: str = "action_source"

    @abstractmethod
    def act(self, observation: np.ndarray, rng: np.random.Generator,
            deterministic: bool = False) -> np.ndarray:
        """
        Escolhe uma ação.

        Args:
            observation: Observação do ambiente
            rng: Gerador para ruído de exploração
            deterministic: Se True, sem ruído

        Returns:
            Vetor de ação
        """
        pass


# ========== INTERFACE: Q FUNCTION ==========

class IQFunction(ABC):
    """Interface para funções Q inspecionáveis (críticos e stubs de teste)."""

    @abstractmethod
    def q_values(self, s: np.ndarray, a: np.ndarray) -> np.ndarray:
        """Q para batch [B×obs], [B×act] -> [B]."""
        pass

    @abstractmethod
    def features(self, s: np.ndarray, a: np.ndarray) -> np.ndarray:
        """Features da penúltima camada Φ(s, a) -> [B×d]."""
        pass

    @abstractmethod
    def q_and_action_grad(self, s: np.ndarray, a: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(Q [B], ∂Q/∂a [B×act])."""
        pass

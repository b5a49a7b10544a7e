"""
Feature Diagnostics - Similaridade de features e rastreio de Q
==============================================================
- ProbeSet: pares (s, a) fixos, sorteados uma vez de rollouts de uma
  política uniforme aleatória (semente própria), comparáveis entre checkpoints
- feature_similarity: matriz min(max(Φᵢ·Φⱼ, −clip), clip)
- q_trace: valores Q dos pares de prova e o limite 1/(1 − γ)

Diagnósticos são funções puras: leem o crítico em modo eval e não
alteram parâmetros nem estatísticas.
"""

import csv
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from core.errors import ConfigurationError
from interfaces.rl_interfaces import IEnvironment, IQFunction

DEFAULT_CLIP = 10_000.0
SIMILARITY_THRESHOLDS = (1.0, 10.0, 100.0)

logger = logging.getLogger(__name__)


# ========== CONJUNTO DE PROVA ==========

@dataclass
class ProbeSet:
    """Pares (s, a) congelados para toda a execução."""
    states: np.ndarray
    actions: np.ndarray
    seed: int = 0

    def __len__(self) -> int:
        return len(self.states)

    def save(self, path: str):
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        np.savez(path, states=self.states, actions=self.actions, seed=np.array(self.seed))

    @classmethod
    def load(cls, path: str) -> "ProbeSet":
        with np.load(path) as data:
            return cls(states=data["states"], actions=data["actions"], seed=int(data["seed"]))


def build_probe_set(env: IEnvironment, pairs: int = 512, episodes: int = 20, seed: int = 12345) -> ProbeSet:
    """
    Sorteia `pairs` pares de rollouts de uma política uniforme aleatória.

    Mesma semente, mesmo conjunto.
    """
    from envs.dataset import rollout
    from envs.demonstrators import RandomPolicy

    if pairs < 2:
        raise ConfigurationError(f"Conjunto de prova precisa de ao menos 2 pares, recebido {pairs}")
    policy = RandomPolicy(env.act_dim)
    states, actions = [], []
    for episode in range(max(episodes, 1)):
        rng = np.random.default_rng([seed, episode])
        trajectory, _ = rollout(env, policy, seed * 1000 + episode, rng)
        states.append(trajectory.observations[:trajectory.length])
        actions.append(trajectory.actions)
    all_states = np.concatenate(states)
    all_actions = np.concatenate(actions)
    index = np.random.default_rng(seed).choice(len(all_states), size=pairs, replace=len(all_states) < pairs)
    logger.info(f"[DIAG] Conjunto de prova: {pairs} pares de {len(all_states)} transições aleatórias")
    return ProbeSet(states=all_states[index], actions=all_actions[index], seed=seed)


# ========== SIMILARIDADE ==========

@dataclass
class SimilarityReport:
    """Matriz de produtos internos cortados e resumo."""
    pair_count: int
    matrix: np.ndarray
    clip: float
    mean_abs: float
    max_value: float
    fraction_above: Dict[float, float] = field(default_factory=dict)
    step: int = 0

    def summary(self) -> Dict[str, float]:
        row = {"step": self.step, "pairs": self.pair_count, "mean_abs": self.mean_abs, "max": self.max_value}
        row.update({f"frac_above_{t:g}": v for t, v in self.fraction_above.items()})
        return row

    def to_csv(self, path: str):
        """Matriz linha a linha, cabeçalho j0..j{n−1}."""
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"j{j}" for j in range(self.pair_count)])
            for row in self.matrix:
                writer.writerow([repr(float(v)) for v in row])


def similarity_from_features(phi: np.ndarray, clip: float = DEFAULT_CLIP,
                             thresholds: Sequence[float] = SIMILARITY_THRESHOLDS, step: int = 0) -> SimilarityReport:
    phi = np.asarray(phi, dtype=np.float64)
    matrix = np.clip(phi @ phi.T, -clip, clip)
    return SimilarityReport(
        pair_count=len(phi),
        matrix=matrix,
        clip=clip,
        mean_abs=float(np.mean(np.abs(matrix))),
        max_value=float(np.max(matrix)),
        fraction_above={float(t): float(np.mean(np.abs(matrix) > t)) for t in thresholds},
        step=step,
    )


def feature_similarity(critic: IQFunction, states: np.ndarray, actions: np.ndarray,
                       clip: float = DEFAULT_CLIP, step: int = 0) -> SimilarityReport:
    """
    Entrada (i, j) = Φᵢ·Φⱼ cortado em [−clip, clip], diagonal incluída.

    Raises:
        ConfigurationError: menos de 2 pares
    """
    if len(states) < 2:
        raise ConfigurationError(f"feature_similarity exige k >= 2, recebido {len(states)}")
    return similarity_from_features(critic.features(states, actions), clip, step=step)


# ========== RASTREIO DE Q ==========

@dataclass
class QTrace:
    """Valores Q dos pares de prova em um checkpoint."""
    step: int
    values: np.ndarray
    gamma: float
    phase: str = "offline"

    @property
    def bound(self) -> float:
        return 1.0 / (1.0 - self.gamma)

    @property
    def fraction_above_bound(self) -> float:
        return float(np.mean(self.values > self.bound))

    @property
    def exceeds_bound(self) -> bool:
        return bool(np.any(self.values > self.bound))

    def summary(self) -> Dict[str, float]:
        return {"phase": self.phase, "step": self.step, "bound": self.bound,
                "mean": float(np.mean(self.values)), "max": float(np.max(self.values)),
                "frac_above_bound": self.fraction_above_bound}


def q_trace(critic: IQFunction, states: np.ndarray, actions: np.ndarray, gamma: float,
            step: int = 0, phase: str = "offline") -> QTrace:
    if not 0.0 <= gamma < 1.0:
        raise ConfigurationError(f"γ deve estar em [0, 1), recebido {gamma}")
    return QTrace(step=step, values=np.asarray(critic.q_values(states, actions), dtype=np.float64),
                  gamma=gamma, phase=phase)


def write_q_traces(path: str, traces: List[QTrace], append: bool = False):
    """Formato longo: phase, step, probe, q, bound."""
    exists = append and os.path.exists(path)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "a" if append else "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if not exists:
            writer.writerow(["phase", "step", "probe", "q", "bound"])
        for trace in traces:
            for i, value in enumerate(trace.values):
                writer.writerow([trace.phase, trace.step, i, repr(float(value)), repr(trace.bound)])


def flag_divergence(traces: List[QTrace], log: Optional[logging.Logger] = None) -> List[int]:
    """Passos cujos valores ultrapassam 1/(1 − γ)."""
    log = log or logger
    flagged = [trace.step for trace in traces if trace.exceeds_bound]
    for trace in traces:
        if trace.exceeds_bound:
            log.warning(f"[DIAG] Q acima do limite {trace.bound:.1f} no passo {trace.step} "
                        f"({trace.fraction_above_bound:.1%} dos pares, máx {np.max(trace.values):.1f})")
    return flagged

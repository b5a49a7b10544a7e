"""
Transitions - Montagem de transições de N passos
================================================
Para cada passo t de uma trajetória de comprimento L:

    n_used        = min(N, L − t)
    n_step_return = Σ_{n < n_used} γⁿ r_{t+n}
    s_target      = s_{t+n_used}

Transições de cauda (n_used < N) são mantidas, com bootstrap em
s_{t+n_used}. Episódios terminam por horizonte ou fault, nunca por
sucesso: bootstrap é verdadeiro em ambos os casos, a não ser que
bootstrap_on_fault=False trate o fault como estado absorvente.
"""

from dataclasses import dataclass, fields
from typing import List, Sequence

import numpy as np

from envs.dataset import Trajectory

SOURCE_OFFLINE = 0
SOURCE_ONLINE = 1


@dataclass
class Transition:
    """Uma transição de N passos (mais o par consecutivo usado pelo DR3)."""
    s: np.ndarray
    a: np.ndarray
    n_step_return: float
    s_target: np.ndarray
    n_used: int
    bootstrap: bool
    fault: bool
    s_next: np.ndarray
    a_next: np.ndarray
    has_next: bool


@dataclass
class TransitionBatch:
    """Transições empilhadas em arrays (eixo 0 = batch)."""
    s: np.ndarray
    a: np.ndarray
    n_step_return: np.ndarray
    s_target: np.ndarray
    n_used: np.ndarray
    bootstrap: np.ndarray
    fault: np.ndarray
    s_next: np.ndarray
    a_next: np.ndarray
    has_next: np.ndarray
    source: np.ndarray

    def __len__(self) -> int:
        return int(self.n_step_return.shape[0])

    def take(self, index: np.ndarray) -> "TransitionBatch":
        return TransitionBatch(**{f.name: getattr(self, f.name)[index] for f in fields(self)})

    def with_source(self, source: int) -> "TransitionBatch":
        batch = self.take(np.arange(len(self)))
        batch.source = np.full(len(self), source, dtype=np.int64)
        return batch

    @classmethod
    def concatenate(cls, batches: Sequence["TransitionBatch"]) -> "TransitionBatch":
        return cls(**{f.name: np.concatenate([getattr(b, f.name) for b in batches])
                      for f in fields(cls)})

    @classmethod
    def from_transitions(cls, transitions: Sequence[Transition], source: int = SOURCE_OFFLINE) -> "TransitionBatch":
        return cls(
            s=np.array([t.s for t in transitions], dtype=np.float64),
            a=np.array([t.a for t in transitions], dtype=np.float64),
            n_step_return=np.array([t.n_step_return for t in transitions], dtype=np.float64),
            s_target=np.array([t.s_target for t in transitions], dtype=np.float64),
            n_used=np.array([t.n_used for t in transitions], dtype=np.int64),
            bootstrap=np.array([t.bootstrap for t in transitions], dtype=bool),
            fault=np.array([t.fault for t in transitions], dtype=bool),
            s_next=np.array([t.s_next for t in transitions], dtype=np.float64),
            a_next=np.array([t.a_next for t in transitions], dtype=np.float64),
            has_next=np.array([t.has_next for t in transitions], dtype=bool),
            source=np.full(len(transitions), source, dtype=np.int64),
        )

    def to_transitions(self) -> List[Transition]:
        return [
            Transition(s=self.s[i], a=self.a[i], n_step_return=float(self.n_step_return[i]),
                       s_target=self.s_target[i], n_used=int(self.n_used[i]),
                       bootstrap=bool(self.bootstrap[i]), fault=bool(self.fault[i]),
                       s_next=self.s_next[i], a_next=self.a_next[i], has_next=bool(self.has_next[i]))
            for i in range(len(self))
        ]


def assemble_nstep_batch(trajectory: Trajectory, N: int, gamma: float,
                         bootstrap_on_fault: bool = True) -> TransitionBatch:
    """Versão vetorizada de assemble_nstep (mesma soma, mesma ordem)."""
    if N < 1:
        raise ValueError(f"N deve ser >= 1, recebido {N}")
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"γ deve estar em [0, 1), recebido {gamma}")

    L = trajectory.length
    obs = trajectory.observations
    acts = trajectory.actions
    rewards = trajectory.rewards
    t = np.arange(L)
    n_used = np.minimum(N, L - t)

    returns = np.zeros(L)
    for n in range(N):
        valid = n < n_used
        returns[valid] += gamma ** n * rewards[t[valid] + n]

    reaches_end = t + n_used == L
    fault = np.logical_and(trajectory.fault, reaches_end)
    bootstrap = np.ones(L, dtype=bool) if bootstrap_on_fault else ~fault
    has_next = t + 1 < L
    next_action_index = np.where(has_next, t + 1, t)

    return TransitionBatch(
        s=obs[:L],
        a=acts,
        n_step_return=returns,
        s_target=obs[t + n_used],
        n_used=n_used.astype(np.int64),
        bootstrap=bootstrap,
        fault=fault,
        s_next=obs[t + 1],
        a_next=acts[next_action_index],
        has_next=has_next,
        source=np.zeros(L, dtype=np.int64),
    )


def assemble_nstep(trajectory: Trajectory, N: int, gamma: float,
                   bootstrap_on_fault: bool = True) -> List[Transition]:
    """
    Uma Transition por passo da trajetória.

    Args:
        trajectory: Episódio completo (truncado ou com fault)
        N: Horizonte do retorno (>= 1)
        gamma: Desconto em [0, 1)
        bootstrap_on_fault: False trata o fault final como absorvente

    Returns:
        Lista vazia para trajetória vazia
    """
    if trajectory.length == 0:
        if N < 1 or not 0.0 <= gamma < 1.0:
            raise ValueError("N >= 1 e γ em [0, 1) são obrigatórios")
        return []
    return assemble_nstep_batch(trajectory, N, gamma, bootstrap_on_fault).to_transitions()

"""
DualBuffer - Buffers offline/online com amostragem simétrica
============================================================
D_off: demonstrações + episódios online bem-sucedidos (auto-imitação)
D_on:  todos os episódios online

Amostragem simétrica: batch_size/2 transições uniformes de cada buffer,
composição exata. Com D_on vazio (fase offline) o batch inteiro vem de
D_off. Com a amostragem simétrica desligada, uniforme sobre a união.

Persistência: um arquivo de dataset por buffer (formato de envs.dataset)
mais um manifesto que distingue originais de D_off de commits de
auto-imitação.
"""

import json
import logging
import os
from typing import Dict, List, Optional

import numpy as np

from core.errors import BufferEmptyError, ConfigurationError
from envs.dataset import Trajectory, load_dataset, save_dataset
from replay.transitions import SOURCE_OFFLINE, SOURCE_ONLINE, TransitionBatch, assemble_nstep_batch

MANIFEST_NAME = "buffer_manifest.json"
OFFLINE_FILE = "d_off.jsonl"
ONLINE_FILE = "d_on.jsonl"


class TrajectoryStore:
    """Lista de trajetórias com as transições de N passos já montadas."""

    def __init__(self, name: str, n_step: int, gamma: float, bootstrap_on_fault: bool, source: int):
        self.name = name
        self.n_step = n_step
        self.gamma = gamma
        self.bootstrap_on_fault = bootstrap_on_fault
        self.source = source
        self.trajectories: List[Trajectory] = []
        self._pieces: List[TransitionBatch] = []
        self._cache: Optional[TransitionBatch] = None

    def append(self, trajectory: Trajectory):
        self.trajectories.append(trajectory)
        if trajectory.length > 0:
            piece = assemble_nstep_batch(trajectory, self.n_step, self.gamma, self.bootstrap_on_fault)
            self._pieces.append(piece.with_source(self.source))
        self._cache = None

    @property
    def transitions(self) -> TransitionBatch:
        if self._cache is None:
            self._cache = TransitionBatch.concatenate(self._pieces)
        return self._cache

    def num_transitions(self) -> int:
        return int(sum(len(p) for p in self._pieces))

    def __len__(self) -> int:
        return len(self.trajectories)

    def sample(self, rng: np.random.Generator, count: int) -> TransitionBatch:
        index = rng.integers(0, self.num_transitions(), size=count)
        return self.transitions.take(index)


class DualBuffer:
    """
    Par (D_off, D_on) com as regras de commit e amostragem.

    Características:
    - Commit de auto-imitação idempotente por episódio
    - Amostragem simétrica exata (não apenas em esperança)
    - Gerador aleatório próprio (parte do estado retomável)
    """

    def __init__(self, n_step: int, gamma: float, rng: Optional[np.random.Generator] = None,
                 symmetric_sampling: bool = True, self_imitation: bool = True,
                 bootstrap_on_fault: bool = True, logger: Optional[logging.Logger] = None):
        self.n_step = n_step
        self.gamma = gamma
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.symmetric_sampling = symmetric_sampling
        self.self_imitation = self_imitation
        self.bootstrap_on_fault = bootstrap_on_fault
        self.logger = logger or logging.getLogger(__name__)

        self.d_off = TrajectoryStore("D_off", n_step, gamma, bootstrap_on_fault, SOURCE_OFFLINE)
        self.d_on = TrajectoryStore("D_on", n_step, gamma, bootstrap_on_fault, SOURCE_ONLINE)
        self.offline_origins: List[str] = []
        self._committed: set = set()
        self._online_counter = 0
        self.stats: Dict[str, int] = {"online_episodes": 0, "sil_commits": 0, "sil_rejections": 0}

    # ========== INSERÇÃO ==========

    def add_offline(self, trajectories: List[Trajectory]):
        """Carrega demonstrações em D_off."""
        for trajectory in trajectories:
            self.d_off.append(trajectory)
            self.offline_origins.append("demo")
        self.logger.info(f"[BUFFER] {len(trajectories)} demonstrações em D_off "
                         f"({self.d_off.num_transitions()} transições)")

    def add_online_episode(self, trajectory: Trajectory):
        """Anexa o episódio a D_on e lhe atribui um índice online."""
        trajectory.metadata.setdefault("online_index", self._online_counter)
        self._online_counter += 1
        self.d_on.append(trajectory)
        self.stats["online_episodes"] += 1

    def sil_commit(self, trajectory: Trajectory) -> bool:
        """
        Copia um episódio bem-sucedido (retorno > 0) para D_off.

        Returns:
            True se o episódio foi (agora) copiado; False se o retorno é 0,
            se a auto-imitação está desligada ou se já havia sido copiado
        """
        if not self.self_imitation:
            return False
        key = trajectory.metadata.get("online_index", id(trajectory))
        if key in self._committed:
            return False
        if not trajectory.episode_return > 0.0:
            self.stats["sil_rejections"] += 1
            return False
        self._committed.add(key)
        self.d_off.append(trajectory)
        self.offline_origins.append("sil")
        self.stats["sil_commits"] += 1
        self.logger.debug(f"[BUFFER] Commit de auto-imitação: episódio {key} "
                          f"(retorno {trajectory.episode_return:.1f})")
        return True

    # ========== AMOSTRAGEM ==========

    def sample_symmetric(self, batch_size: int) -> TransitionBatch:
        """
        Batch com metade de cada buffer.

        Raises:
            ConfigurationError: batch_size ímpar ou não positivo
            BufferEmptyError: os dois buffers vazios
        """
        if batch_size <= 0 or batch_size % 2 != 0:
            raise ConfigurationError(f"batch_size deve ser par e positivo, recebido {batch_size}")
        n_off = self.d_off.num_transitions()
        n_on = self.d_on.num_transitions()
        if n_off == 0 and n_on == 0:
            raise BufferEmptyError("D_off e D_on vazios")

        if not self.symmetric_sampling and n_off > 0 and n_on > 0:
            union = TransitionBatch.concatenate([self.d_off.transitions, self.d_on.transitions])
            return union.take(self.rng.integers(0, n_off + n_on, size=batch_size))
        if n_on == 0:
            return self.d_off.sample(self.rng, batch_size)
        if n_off == 0:
            return self.d_on.sample(self.rng, batch_size)
        half = batch_size // 2
        return TransitionBatch.concatenate([self.d_off.sample(self.rng, half),
                                            self.d_on.sample(self.rng, half)])

    def sample_states(self, count: int) -> np.ndarray:
        """Estados amostrados pela mesma regra (segundo batch independente)."""
        return self.sample_symmetric(count).s

    # ========== PERSISTÊNCIA ==========

    def save(self, directory: str):
        os.makedirs(directory, exist_ok=True)
        save_dataset(os.path.join(directory, OFFLINE_FILE), self.d_off.trajectories)
        save_dataset(os.path.join(directory, ONLINE_FILE), self.d_on.trajectories)
        manifest = {
            "n_step": self.n_step,
            "gamma": self.gamma,
            "symmetric_sampling": self.symmetric_sampling,
            "self_imitation": self.self_imitation,
            "bootstrap_on_fault": self.bootstrap_on_fault,
            "offline_origins": self.offline_origins,
            "committed": sorted(self._committed, key=str),
            "online_counter": self._online_counter,
            "stats": self.stats,
        }
        with open(os.path.join(directory, MANIFEST_NAME), "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2)
        self.logger.info(f"[BUFFER] Buffers gravados em {directory}")

    @classmethod
    def load(cls, directory: str, rng: Optional[np.random.Generator] = None,
             logger: Optional[logging.Logger] = None) -> "DualBuffer":
        with open(os.path.join(directory, MANIFEST_NAME), "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
        buffer = cls(manifest["n_step"], manifest["gamma"], rng=rng,
                     symmetric_sampling=manifest["symmetric_sampling"],
                     self_imitation=manifest["self_imitation"],
                     bootstrap_on_fault=manifest["bootstrap_on_fault"], logger=logger)
        for trajectory in load_dataset(os.path.join(directory, OFFLINE_FILE)):
            buffer.d_off.append(trajectory)
        for trajectory in load_dataset(os.path.join(directory, ONLINE_FILE)):
            buffer.d_on.append(trajectory)
        buffer.offline_origins = list(manifest["offline_origins"])
        buffer._committed = set(manifest["committed"])
        buffer._online_counter = manifest["online_counter"]
        buffer.stats = dict(manifest["stats"])
        return buffer

"""
Trainer - Laços offline e online, avaliação e diagnósticos periódicos
=====================================================================
Fluxo por execução (config, seed):

    offline: passos de gradiente amostrando só de D_off
    online:  por episódio: rollout estocástico -> D_on -> commit SIL ->
             updates_per_episode atualizações em batches simétricos -> métricas
    avaliação: rollouts determinísticos (ação média)

Geradores aleatórios separados por finalidade (buffer, atualizações,
rollouts), todos derivados da seed e gravados nos checkpoints.
"""

import logging
import os
import time
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np

from agents.agent import Agent
from config.config_completa import ExperimentConfig
from core.checkpoint import load_checkpoint, rng_from_state, rng_state, save_checkpoint
from core.errors import ConfigurationError, DivergenceError
from diagnostics.feature_diagnostics import (
    ProbeSet, build_probe_set, feature_similarity, q_trace, write_q_traces,
)
from diagnostics.training_diagnostics import TrainingDiagnostics
from envs.dataset import rollout
from interfaces.rl_interfaces import EnvState, IActionSource, IEnvironment
from replay.dual_buffer import DualBuffer
from services.metrics import MetricsRow, MetricsWriter

# Faixas de sementes de reset disjuntas da coleta (seed·100000 + k)
ONLINE_SEED_BASE = 500_000_000
EVAL_SEED_BASE = 900_000_000


def online_reset_seed(seed: int, episode: int) -> int:
    return ONLINE_SEED_BASE + seed * 100_000 + episode


def eval_reset_seed(seed: int, attempt: int) -> int:
    return EVAL_SEED_BASE + seed * 100_000 + attempt


@dataclass
class TrainingRngs:
    """Um gerador por finalidade."""
    buffer: np.random.Generator
    updates: np.random.Generator
    rollout: np.random.Generator

    @classmethod
    def for_seed(cls, seed: int) -> "TrainingRngs":
        return cls(buffer=np.random.default_rng([seed, 2]),
                   updates=np.random.default_rng([seed, 3]),
                   rollout=np.random.default_rng([seed, 4]))

    def state_dict(self) -> Dict[str, Any]:
        return {name: rng_state(getattr(self, name)) for name in ("buffer", "updates", "rollout")}

    @classmethod
    def from_state_dict(cls, data: Dict[str, Any]) -> "TrainingRngs":
        return cls(**{name: rng_from_state(state) for name, state in data.items()})


@dataclass
class EvalResult:
    attempts: int
    success_rate: float
    fault_rate: float
    mean_return: float
    source: str = "checkpoint"
    outcomes: Optional[List[Dict[str, Any]]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {"attempts": self.attempts, "success_rate": self.success_rate,
                "fault_rate": self.fault_rate, "mean_return": self.mean_return, "source": self.source}


def evaluate_policy(env: IEnvironment, source: IActionSource, attempts: int, seed: int,
                    deterministic: bool = True) -> EvalResult:
    """Rollouts independentes com sementes de avaliação (nunca as de treino)."""
    if attempts < 1:
        raise ConfigurationError(f"attempts deve ser >= 1, recebido {attempts}")
    outcomes = []
    for attempt in range(attempts):
        rng = np.random.default_rng([seed, 7, attempt])
        trajectory, _ = rollout(env, source, eval_reset_seed(seed, attempt), rng, deterministic=deterministic)
        outcomes.append({"success": trajectory.success, "fault": trajectory.fault,
                         "return": trajectory.episode_return, "transitions": trajectory.length})
    return EvalResult(
        attempts=attempts,
        success_rate=sum(o["success"] for o in outcomes) / attempts,
        fault_rate=sum(o["fault"] for o in outcomes) / attempts,
        mean_return=float(np.mean([o["return"] for o in outcomes])),
        source=getattr(source, "name", "policy"),
        outcomes=outcomes,
    )


def record_evaluation(metrics: MetricsWriter, result: EvalResult, updates: int,
                      wall_time: Optional[float] = None):
    """Uma linha "eval" por tentativa; o índice continua a sequência do arquivo."""
    last = metrics.last_index("eval")
    start = 0 if last is None else last + 1
    for offset, outcome in enumerate(result.outcomes or []):
        metrics.append(MetricsRow(phase="eval", index=start + offset, success=outcome["success"],
                                  fault=outcome["fault"], episode_return=outcome["return"],
                                  transitions=outcome["transitions"], updates=updates, wall_time=wall_time))


class _LossAccumulator:
    """Médias dos componentes entre duas linhas de métricas."""

    KEYS = ("loss_td", "loss_cql", "loss_reg", "loss_actor", "loss_bc", "temperature", "entropy", "q_mean")

    def __init__(self):
        self.reset()

    def reset(self):
        self._sums: Dict[str, float] = {}
        self._counts: Dict[str, int] = {}

    def add(self, **values: float):
        for key, value in values.items():
            self._sums[key] = self._sums.get(key, 0.0) + float(value)
            self._counts[key] = self._counts.get(key, 0) + 1

    def means(self) -> Dict[str, Optional[float]]:
        return {k: (self._sums[k] / self._counts[k] if k in self._counts else None) for k in self.KEYS}


class Trainer:
    """
    Orquestra agente, buffer, ambiente, métricas e diagnósticos de uma execução.

    Responsabilidades:
    - Fase offline (passos de gradiente em D_off)
    - Fase online (episódios + atualizações simétricas)
    - Avaliação periódica e diagnósticos por cadência
    - Interrupção com DivergenceError quando a perda deixa de ser finita
    """

    def __init__(self, config: ExperimentConfig, env: IEnvironment, agent: Agent, buffer: DualBuffer,
                 rngs: TrainingRngs, seed: int, metrics: MetricsWriter,
                 diagnostics_dir: Optional[str] = None, probe: Optional[ProbeSet] = None,
                 diagnostics: Optional[TrainingDiagnostics] = None,
                 logger: Optional[logging.Logger] = None):
        self.config = config
        self.env = env
        self.agent = agent
        self.buffer = buffer
        self.rngs = rngs
        self.seed = seed
        self.metrics = metrics
        self.diagnostics_dir = diagnostics_dir
        self.probe = probe
        self.diagnostics = diagnostics or TrainingDiagnostics(logger)
        self.logger = logger or logging.getLogger(__name__)
        self.offline_steps_done = 0
        self.episodes_done = 0
        self._previous_state: Optional[EnvState] = None

    # ========== ATUALIZAÇÕES ==========

    def _rl_update(self, accumulator: _LossAccumulator) -> bool:
        """Uma atualização de crítico + ator. Devolve True se divergiu."""
        cfg = self.config.agent
        batch = self.buffer.sample_symmetric(cfg.batch_size)
        reg_states = self.buffer.sample_states(cfg.batch_size) if self.agent.spec.regularizer == "ntk" else None
        critic = self.agent.critic_update(batch, self.rngs.updates, reg_states)
        self.diagnostics.register_update("critic", critic.diverged)
        if critic.diverged:
            return True
        actor = self.agent.actor_update(batch.s, self.rngs.updates)
        self.diagnostics.register_update("actor", actor.diverged)
        accumulator.add(loss_td=critic.td, loss_cql=critic.cql, loss_reg=critic.reg, q_mean=critic.q_mean,
                        loss_actor=actor.actor, temperature=actor.temperature, entropy=actor.entropy)
        return actor.diverged

    def _bc_update(self, accumulator: _LossAccumulator) -> bool:
        if self.buffer.d_off.num_transitions() == 0:
            raise ConfigurationError("BC sem demonstrações em D_off")
        batch = self.buffer.d_off.sample(self.buffer.rng, self.config.agent.batch_size)
        faults_before = len(self.agent.faults)
        loss = self.agent.bc_update(batch.s, batch.a)
        diverged = len(self.agent.faults) > faults_before
        self.diagnostics.register_update("bc", diverged)
        accumulator.add(loss_bc=loss)
        return diverged

    def _update(self, accumulator: _LossAccumulator) -> bool:
        if self.agent.spec.trains_critic:
            return self._rl_update(accumulator)
        return self._bc_update(accumulator)

    def _wall_time(self) -> Optional[float]:
        return time.time() if self.config.record_wall_time else None

    def _halt(self, where: str):
        fault = self.agent.faults[-1] if self.agent.faults else {}
        self.logger.error(f"[TRAIN] Divergência em {where}: {fault.get('reason', 'perda não finita')}")
        raise DivergenceError(f"Divergência em {where}: {fault.get('reason', 'perda não finita')}")

    # ========== FASE OFFLINE ==========

    def run_offline(self, steps: int, metrics_every: int = 100) -> int:
        """
        Executa `steps` passos de gradiente amostrando só de D_off.

        Raises:
            DivergenceError: perda não finita (linha de métricas já gravada)
        """
        if self.buffer.d_on.num_transitions() > 0:
            raise ConfigurationError("Fase offline com D_on não vazio")
        cfg = self.config
        accumulator = _LossAccumulator()
        self.logger.info(f"[TRAIN] Fase offline: {steps} passos ({cfg.agent.algorithm}, seed {self.seed})")
        if steps > 0 and cfg.offline_diagnostics_every > 0:
            self.run_periodic_diagnostics("offline", 0)

        for step in range(1, steps + 1):
            diverged = self._update(accumulator)
            self.offline_steps_done = step
            if diverged or step % metrics_every == 0 or step == steps:
                self.metrics.append(MetricsRow(phase="offline", index=step, updates=self.agent.gradient_steps,
                                               wall_time=self._wall_time(), **accumulator.means()))
                accumulator.reset()
            if diverged:
                self._halt(f"passo offline {step}")
            if cfg.offline_diagnostics_every > 0 and step % cfg.offline_diagnostics_every == 0:
                self.run_periodic_diagnostics("offline", step)
            if cfg.offline_eval_every > 0 and step % cfg.offline_eval_every == 0:
                self.evaluate_and_record(cfg.eval_attempts)
        self.logger.info(f"[TRAIN] Fase offline concluída ({self.agent.gradient_steps} atualizações)")
        return self.offline_steps_done

    # ========== FASE ONLINE ==========

    def run_episode(self, episode: int) -> MetricsRow:
        """Um episódio online seguido das atualizações."""
        trajectory, final_state = rollout(self.env, self.agent.policy, online_reset_seed(self.seed, episode),
                                          self.rngs.rollout, deterministic=False,
                                          previous=self._previous_state)
        self._previous_state = final_state
        trajectory.metadata["episode"] = episode
        self.buffer.add_online_episode(trajectory)
        committed = self.buffer.sil_commit(trajectory)

        accumulator = _LossAccumulator()
        updates = 0
        for _ in range(self.config.agent.updates_per_episode):
            diverged = self._update(accumulator)
            updates += 1
            if diverged:
                break
        else:
            diverged = False

        row = MetricsRow(phase="online", index=episode, success=trajectory.success, fault=trajectory.fault,
                         episode_return=trajectory.episode_return, transitions=trajectory.length,
                         updates=updates, wall_time=self._wall_time(), **accumulator.means())
        self.metrics.append(row)
        self.diagnostics.register_episode({"episode": episode, "success": trajectory.success,
                                           "fault": trajectory.fault, "return": trajectory.episode_return,
                                           "sil_commit": committed, "transitions": trajectory.length,
                                           "updates": updates})
        if diverged:
            self._halt(f"episódio online {episode}")
        return row

    def run_online(self, episodes: int) -> int:
        cfg = self.config
        start = self.episodes_done
        self.logger.info(f"[TRAIN] Fase online: episódios {start}..{episodes - 1} "
                         f"({cfg.agent.updates_per_episode} atualizações por episódio)")
        for episode in range(start, episodes):
            row = self.run_episode(episode)
            self.episodes_done = episode + 1
            if cfg.diagnostics_every > 0 and self.episodes_done % cfg.diagnostics_every == 0:
                self.run_periodic_diagnostics("online", self.agent.gradient_steps)
            if episode % 10 == 9:
                stats = self.diagnostics.get_episode_statistics()
                self.logger.info(f"[TRAIN] Episódio {episode + 1}: sucesso acumulado "
                                 f"{stats['success_rate']:.1%}, faults {stats['fault_episodes']}, "
                                 f"último retorno {row.episode_return:.1f}")
        if self.buffer.stats["sil_commits"] == 0 and episodes > start:
            self.logger.warning("[TRAIN] Nenhum episódio online copiado para D_off")
        return self.episodes_done

    # ========== AVALIAÇÃO E DIAGNÓSTICOS ==========

    def evaluate_and_record(self, attempts: int) -> EvalResult:
        result = evaluate_policy(self.env, self.agent.policy, attempts, self.seed)
        record_evaluation(self.metrics, result, self.agent.gradient_steps, self._wall_time())
        self.diagnostics.register_evaluation({"updates": self.agent.gradient_steps, **result.to_dict()})
        self.logger.info(f"[EVAL] {attempts} tentativas após {self.agent.gradient_steps} atualizações: "
                         f"sucesso {result.success_rate:.1%}, fault {result.fault_rate:.1%}")
        return result

    def ensure_probe(self) -> ProbeSet:
        if self.probe is None:
            cfg = self.config
            self.probe = build_probe_set(self.env, cfg.probe_pairs, cfg.probe_episodes, cfg.probe_seed)
        return self.probe

    def run_periodic_diagnostics(self, phase: str, step: int):
        """Q dos pares de prova e resumo da similaridade, sem alterar o estado."""
        critic = self.agent.critic
        if critic is None or self.diagnostics_dir is None:
            return
        probe = self.ensure_probe()
        trace = q_trace(critic, probe.states, probe.actions, self.config.agent.gamma, step, phase)
        self.diagnostics.register_q_trace(trace)
        write_q_traces(os.path.join(self.diagnostics_dir, "q_trace.csv"), [trace], append=True)
        report = feature_similarity(critic, probe.states, probe.actions, self.config.similarity_clip, step)
        self.diagnostics.register_similarity(report, phase)
        self.logger.debug(f"[DIAG] {phase} passo {step}: Q médio {np.mean(trace.values):.2f}, "
                          f"|Φᵢ·Φⱼ| médio {report.mean_abs:.2f}")

    # ========== CHECKPOINT ==========

    def checkpoint_payload(self, phase: str) -> Dict[str, Any]:
        return {
            "phase": phase,
            "seed": self.seed,
            "experiment_config": self.config.to_dict(),
            "agent": self.agent.state_dict(),
            "rng": self.rngs.state_dict(),
            "offline_steps_done": self.offline_steps_done,
            "episodes_done": self.episodes_done,
        }

    def save(self, path: str, phase: str):
        save_checkpoint(path, self.checkpoint_payload(phase))


def restore_agent(path: str, logger: Optional[logging.Logger] = None) -> Dict[str, Any]:
    """Lê um checkpoint de treino; devolve o documento com o Agent reconstruído em 'agent'."""
    document = load_checkpoint(path)
    if "agent" not in document:
        raise ConfigurationError(f"{path}: checkpoint sem agente")
    document = dict(document)
    document["agent"] = Agent.from_state_dict(document["agent"], logger)
    return document


def probe_from_disk(path: str) -> Optional[ProbeSet]:
    return ProbeSet.load(path) if os.path.exists(path) else None

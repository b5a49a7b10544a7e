"""
Commands - Etapas do protocolo sobre um diretório de execução
=============================================================
collect -> train-offline -> train-online -> evaluate -> diagnose

Cada comando recebe um RunContext (config, seed, caminhos, logger), lê os
artefatos das etapas anteriores e grava os seus. Nada é guardado entre
chamadas fora do disco: qualquer etapa pode ser refeita ou retomada a
partir do diretório.

sweep roda o pipeline completo para cada ponto de uma grade × seeds, cada
execução num processo próprio e num diretório próprio.
"""

import csv
import itertools
import json
import logging
import os
import re
import subprocess
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from agents.agent import Agent
from config.config_completa import ExperimentConfig, apply_overrides, experiment_config_from_dict
from core.errors import ConfigurationError, DivergenceError
from diagnostics.feature_diagnostics import build_probe_set, feature_similarity, q_trace, write_q_traces
from diagnostics.policy_diagnostics import action_histogram, q_action_gradient_field
from diagnostics.run_statistics import run_statistics
from diagnostics.training_diagnostics import TrainingDiagnostics
from envs import make_env
from envs.dataset import Trajectory, collect_demonstrations, load_dataset, save_dataset
from envs.demonstrators import RandomPolicy, demonstrator_for
from envs.rendering import render_arrow
from interfaces.rl_interfaces import IActionSource, IEnvironment
from replay.dual_buffer import ONLINE_FILE, DualBuffer
from services.metrics import MetricsWriter, read_metrics
from services.run_context import RunContext
from services.trainer import (
    EvalResult, Trainer, TrainingRngs, evaluate_policy, probe_from_disk, record_evaluation, restore_agent,
)

DIAGNOSTICS = ("similarity", "q_trace", "action_histogram", "gradient_field", "run_statistics", "arrow_frames")
EVAL_POLICIES = ("checkpoint", "demonstrator", "random")
ARROW_FRAMES = 8
HISTOGRAM_BINS = 20
GRADIENT_GRID = 21


# ========== CONSTRUÇÃO ==========

def build_env(config: ExperimentConfig, logger: Optional[logging.Logger] = None) -> IEnvironment:
    env = make_env(config.env.name, **config.env.env_params())
    (logger or logging.getLogger(__name__)).debug(
        f"[ENV] {env.name}: obs {env.obs_dim}, ação {env.act_dim}, horizonte {env.horizon}")
    return env


def build_buffer(config: ExperimentConfig, rng: np.random.Generator,
                 logger: Optional[logging.Logger] = None) -> DualBuffer:
    agent = config.agent
    return DualBuffer(agent.n_step, agent.gamma, rng=rng, symmetric_sampling=agent.symmetric_sampling,
                      self_imitation=agent.self_imitation, bootstrap_on_fault=agent.bootstrap_on_fault,
                      logger=logger)


def check_dataset(trajectories: List[Trajectory], env: IEnvironment, path: str):
    """
    Raises:
        ConfigurationError: dimensões do dataset diferentes das do ambiente
    """
    for k, trajectory in enumerate(trajectories):
        if trajectory.observations.shape[1] != env.obs_dim:
            raise ConfigurationError(f"{path}: trajetória {k} com observações de dimensão "
                                     f"{trajectory.observations.shape[1]}, ambiente espera {env.obs_dim}")
        if trajectory.length and trajectory.actions.shape[1] != env.act_dim:
            raise ConfigurationError(f"{path}: trajetória {k} com ações de dimensão "
                                     f"{trajectory.actions.shape[1]}, ambiente espera {env.act_dim}")


def _require_compatible(document: Dict[str, Any], config: ExperimentConfig, path: str):
    saved = document.get("experiment_config", {})
    saved_env = saved.get("env", {}).get("name")
    if saved_env is not None and saved_env != config.env.name:
        raise ConfigurationError(f"{path}: checkpoint do ambiente '{saved_env}', configuração usa "
                                 f"'{config.env.name}'")
    agent: Agent = document["agent"]
    if agent.config.algorithm != config.agent.algorithm:
        raise ConfigurationError(f"{path}: checkpoint do algoritmo '{agent.config.algorithm}', "
                                 f"configuração usa '{config.agent.algorithm}'")


def _default_checkpoint(context: RunContext) -> str:
    if os.path.exists(context.online_checkpoint):
        return context.online_checkpoint
    return context.offline_checkpoint


# ========== COLETA ==========

def cmd_collect(context: RunContext) -> str:
    """
    Coleta as demonstrações do demonstrador roteirizado.

    Raises:
        CollectionError: orçamento de tentativas esgotado
    """
    cfg = context.config
    log = context.logger
    env = build_env(cfg, log)
    demonstrator = demonstrator_for(cfg.env.name, cfg.env.demonstrator_gain, cfg.env.demonstrator_noise)
    log.info(f"[CLI] Coletando {cfg.demonstrations} demonstrações ({env.name}, {demonstrator.name}, "
             f"seed {context.seed})")
    trajectories = collect_demonstrations(env, demonstrator, cfg.demonstrations,
                                          success_filter=env.sparse_reward, seed=context.seed)
    save_dataset(context.dataset_path, trajectories)
    returns = [t.episode_return for t in trajectories]
    context.record_command("collect", {
        "demonstrations": len(trajectories),
        "demonstrator": demonstrator.name,
        "env_params": {"name": env.name, "horizon": env.horizon, **cfg.env.env_params()},
        "mean_return": float(np.mean(returns)) if returns else 0.0,
    })
    return context.dataset_path


# ========== TREINO OFFLINE ==========

def cmd_train_offline(context: RunContext) -> str:
    """
    Fase offline a partir do dataset da execução.

    Raises:
        DivergenceError: perda não finita (checkpoints/diverged.json gravado)
    """
    cfg = context.config
    log = context.logger
    env = build_env(cfg, log)
    trajectories = load_dataset(context.dataset_path)
    check_dataset(trajectories, env, context.dataset_path)
    if not trajectories and cfg.offline_steps > 0:
        raise ConfigurationError(f"{context.dataset_path}: dataset vazio")

    metrics = MetricsWriter(context.metrics_path)
    if metrics.last_index("offline") is not None:
        raise ConfigurationError(f"{context.metrics_path} já tem linhas offline; use outro diretório")

    rngs = TrainingRngs.for_seed(context.seed)
    agent = Agent(cfg.agent, env.obs_dim, env.act_dim, env.action_low, env.action_high,
                  rng=np.random.default_rng([context.seed, 1]), logger=log)
    buffer = build_buffer(cfg, rngs.buffer, log)
    buffer.add_offline(trajectories)
    trainer = Trainer(cfg, env, agent, buffer, rngs, context.seed, metrics,
                      diagnostics_dir=context.diagnostics_dir, probe=probe_from_disk(context.probe_path),
                      logger=log)
    try:
        trainer.run_offline(cfg.offline_steps, cfg.offline_metrics_every)
    except DivergenceError:
        trainer.save(context.path("checkpoints", "diverged.json"), "offline")
        raise
    finally:
        if trainer.probe is not None and not os.path.exists(context.probe_path):
            trainer.probe.save(context.probe_path)

    trainer.save(context.offline_checkpoint, "offline")
    context.record_command("train-offline", {"steps": trainer.offline_steps_done,
                                             "updates": agent.gradient_steps,
                                             "checkpoint": os.path.relpath(context.offline_checkpoint,
                                                                           context.run_dir)})
    return context.offline_checkpoint


# ========== TREINO ONLINE ==========

def _online_buffer(context: RunContext, document: Dict[str, Any], rngs: TrainingRngs,
                   env: IEnvironment) -> DualBuffer:
    """Retoma os buffers gravados ou reconstrói D_off a partir do dataset."""
    if document.get("phase") == "online" and os.path.isdir(context.buffer_dir):
        return DualBuffer.load(context.buffer_dir, rng=rngs.buffer, logger=context.logger)
    trajectories = load_dataset(context.dataset_path)
    check_dataset(trajectories, env, context.dataset_path)
    buffer = build_buffer(context.config, rngs.buffer, context.logger)
    buffer.add_offline(trajectories)
    return buffer


def cmd_train_online(context: RunContext, checkpoint: Optional[str] = None) -> str:
    """
    Fase online a partir de um checkpoint (padrão: o offline da execução).

    Um checkpoint online retoma do episódio seguinte ao último gravado.
    """
    cfg = context.config
    log = context.logger
    path = checkpoint or context.offline_checkpoint
    document = restore_agent(path, log)
    _require_compatible(document, cfg, path)
    agent: Agent = document["agent"]
    env = build_env(cfg, log)
    rngs = TrainingRngs.from_state_dict(document["rng"])
    buffer = _online_buffer(context, document, rngs, env)

    metrics = MetricsWriter(context.metrics_path)
    start = int(document.get("episodes_done", 0))
    last = metrics.last_index("online")
    if last is not None and last >= start:
        raise ConfigurationError(f"{context.metrics_path} já tem o episódio online {last}; "
                                 f"checkpoint retoma em {start}")

    agent.set_learning_rate(cfg.agent.online_learning_rate)
    diagnostics = TrainingDiagnostics(log)
    trainer = Trainer(cfg, env, agent, buffer, rngs, context.seed, metrics,
                      diagnostics_dir=context.diagnostics_dir, probe=probe_from_disk(context.probe_path),
                      diagnostics=diagnostics, logger=log)
    trainer.offline_steps_done = int(document.get("offline_steps_done", 0))
    trainer.episodes_done = start

    summary_path = os.path.join(context.diagnostics_dir, "diagnostics_summary.json")
    try:
        trainer.run_online(cfg.online_episodes)
    except DivergenceError:
        buffer.save(context.buffer_dir)
        trainer.save(context.path("checkpoints", "diverged.json"), "online")
        diagnostics.export_summary(summary_path, cfg.to_dict())
        raise

    buffer.save(context.buffer_dir)
    trainer.save(context.online_checkpoint, "online")
    if trainer.probe is not None and not os.path.exists(context.probe_path):
        trainer.probe.save(context.probe_path)
    diagnostics.export_summary(summary_path, cfg.to_dict())
    log.info(diagnostics.get_summary())
    context.record_command("train-online", {"episodes": trainer.episodes_done,
                                            "updates": agent.gradient_steps,
                                            "sil_commits": buffer.stats["sil_commits"],
                                            "resumed_from": os.path.relpath(path, context.run_dir)})
    return context.online_checkpoint


# ========== AVALIAÇÃO ==========

def _eval_source(context: RunContext, env: IEnvironment, policy: str,
                 checkpoint: Optional[str]) -> Tuple[IActionSource, Optional[Agent], str]:
    cfg = context.config
    if policy == "demonstrator":
        return demonstrator_for(cfg.env.name, cfg.env.demonstrator_gain, cfg.env.demonstrator_noise), \
            None, "demonstrator"
    if policy == "random":
        return RandomPolicy(env.act_dim, env.action_low, env.action_high), None, "random"
    if policy != "checkpoint":
        raise ConfigurationError(f"Política de avaliação desconhecida: {policy} "
                                 f"(opções: {', '.join(EVAL_POLICIES)})")
    path = checkpoint or _default_checkpoint(context)
    document = restore_agent(path, context.logger)
    _require_compatible(document, cfg, path)
    return document["agent"].policy, document["agent"], document.get("phase", "checkpoint")


def cmd_evaluate(context: RunContext, policy: str = "checkpoint", checkpoint: Optional[str] = None,
                 attempts: Optional[int] = None) -> EvalResult:
    """
    Rollouts determinísticos (ação média) com sementes de avaliação.

    Grava eval_<rótulo>.json; a política do checkpoint também gera linhas
    "eval" no CSV de métricas.
    """
    cfg = context.config
    log = context.logger
    env = build_env(cfg, log)
    attempts = cfg.eval_attempts if attempts is None else attempts
    source, agent, label = _eval_source(context, env, policy, checkpoint)

    result = evaluate_policy(env, source, attempts, context.seed)
    result.source = label
    if agent is not None:
        record_evaluation(MetricsWriter(context.metrics_path), result, agent.gradient_steps)

    path = context.path(f"eval_{label}.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({**result.to_dict(), "seed": context.seed,
                   "updates": agent.gradient_steps if agent is not None else None,
                   "outcomes": result.outcomes}, fh, indent=2)
    log.info(f"[EVAL] {label}: {attempts} tentativas, sucesso {result.success_rate:.1%}, "
             f"fault {result.fault_rate:.1%}, retorno médio {result.mean_return:.2f}")
    context.record_command("evaluate", {"policy": label, "attempts": attempts,
                                        "success_rate": result.success_rate})
    return result


# ========== DIAGNÓSTICOS ==========

class _DiagnosticInputs:
    """Carrega checkpoint, conjunto de prova e trajetórias só quando pedidos."""

    def __init__(self, context: RunContext, checkpoint: Optional[str]):
        self.context = context
        self.checkpoint = checkpoint or _default_checkpoint(context)
        self._agent: Optional[Agent] = None
        self._env: Optional[IEnvironment] = None
        self._probe = None

    @property
    def env(self) -> IEnvironment:
        if self._env is None:
            self._env = build_env(self.context.config, self.context.logger)
        return self._env

    @property
    def agent(self) -> Agent:
        if self._agent is None:
            document = restore_agent(self.checkpoint, self.context.logger)
            _require_compatible(document, self.context.config, self.checkpoint)
            self._agent = document["agent"]
        return self._agent

    def critic(self):
        critic = self.agent.critic
        if critic is None:
            raise ConfigurationError(f"Algoritmo '{self.agent.config.algorithm}' não tem crítico")
        return critic

    @property
    def probe(self):
        if self._probe is None:
            self._probe = probe_from_disk(self.context.probe_path)
            if self._probe is None:
                cfg = self.context.config
                self._probe = build_probe_set(self.env, cfg.probe_pairs, cfg.probe_episodes, cfg.probe_seed)
                self._probe.save(self.context.probe_path)
        return self._probe

    def trajectories(self) -> Tuple[List[Trajectory], str]:
        """Episódios online quando existem; senão as demonstrações."""
        online = os.path.join(self.context.buffer_dir, ONLINE_FILE)
        if os.path.exists(online):
            episodes = load_dataset(online)
            if episodes:
                return episodes, "online"
        return load_dataset(self.context.dataset_path), "dataset"


def _write_similarity(inputs: _DiagnosticInputs, out_dir: str) -> List[str]:
    probe = inputs.probe
    report = feature_similarity(inputs.critic(), probe.states, probe.actions,
                                inputs.context.config.similarity_clip, step=inputs.agent.gradient_steps)
    path = os.path.join(out_dir, "similarity.csv")
    report.to_csv(path)
    inputs.context.logger.info(f"[DIAG] Similaridade {report.pair_count}×{report.pair_count}: "
                               f"|Φᵢ·Φⱼ| médio {report.mean_abs:.3f}, máximo {report.max_value:.3f}")
    return [path]


def _write_q_trace(inputs: _DiagnosticInputs, out_dir: str) -> List[str]:
    probe = inputs.probe
    trace = q_trace(inputs.critic(), probe.states, probe.actions, inputs.agent.config.gamma,
                    inputs.agent.gradient_steps, phase="checkpoint")
    path = os.path.join(out_dir, "q_trace_checkpoint.csv")
    write_q_traces(path, [trace])
    return [path]


def _write_action_histogram(inputs: _DiagnosticInputs, out_dir: str) -> List[str]:
    trajectories, label = inputs.trajectories()
    env = inputs.env
    histogram = action_histogram(trajectories, HISTOGRAM_BINS,
                                 float(np.min(env.action_low)), float(np.max(env.action_high)))
    path = os.path.join(out_dir, "action_histogram.csv")
    histogram.to_csv(path, label=label)
    inputs.context.logger.info(f"[DIAG] Histograma de ações ({label}, {histogram.samples} ações): "
                               f"índice bang-bang {histogram.bang_bang_index:.3f}")
    return [path]


def _write_gradient_field(inputs: _DiagnosticInputs, out_dir: str) -> List[str]:
    state = inputs.probe.states[0]
    mean_action, _ = inputs.agent.policy.deterministic(state[None, :])
    env = inputs.env
    field = q_action_gradient_field(inputs.critic(), state, mean_action[0], dims=(0, 1), grid=GRADIENT_GRID,
                                    low=float(env.action_low[0]), high=float(env.action_high[0]))
    path = os.path.join(out_dir, "gradient_field.csv")
    field.to_csv(path)
    return [path]


def _write_run_statistics(inputs: _DiagnosticInputs, out_dir: str) -> List[str]:
    context = inputs.context
    records = online_records(context.metrics_path, context.seed)
    if not records:
        raise ConfigurationError(f"{context.metrics_path}: nenhuma linha online")
    cfg = context.config
    stats = run_statistics(records, cfg.success_window, cfg.bootstrap_resamples, log=context.logger)
    path = os.path.join(out_dir, "run_statistics.csv")
    stats.to_csv(path)
    return [path]


def _write_arrow_frames(inputs: _DiagnosticInputs, out_dir: str) -> List[str]:
    env = inputs.env
    if not env.name.startswith("reacher"):
        raise ConfigurationError(f"arrow_frames só existe para o reacher, ambiente é '{env.name}'")
    path = os.path.join(out_dir, "arrow_frames.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame", "dx", "dy"] + [f"p{i}" for i in range(render_arrow(np.zeros(2)).size)])
        for frame in range(ARROW_FRAMES):
            state = env.reset(inputs.context.config.probe_seed * 1000 + frame)
            delta = state.sim["x_goal"] - state.sim["x_curr"]
            writer.writerow([frame, repr(float(delta[0])), repr(float(delta[1]))]
                            + [repr(float(v)) for v in env.render(state)])
    return [path]


_DIAGNOSTIC_WRITERS = {
    "similarity": _write_similarity,
    "q_trace": _write_q_trace,
    "action_histogram": _write_action_histogram,
    "gradient_field": _write_gradient_field,
    "run_statistics": _write_run_statistics,
    "arrow_frames": _write_arrow_frames,
}


def cmd_diagnose(context: RunContext, which: Sequence[str], checkpoint: Optional[str] = None) -> List[str]:
    """
    Gera os diagnósticos pedidos em <run>/diagnostics/.

    Somente leitura sobre checkpoint, buffers e dataset; a mesma entrada
    produz os mesmos CSVs.

    Raises:
        ConfigurationError: nome de diagnóstico desconhecido
    """
    unknown = [name for name in which if name not in _DIAGNOSTIC_WRITERS]
    if unknown:
        raise ConfigurationError(f"Diagnóstico desconhecido: {', '.join(unknown)} "
                                 f"(opções: {', '.join(DIAGNOSTICS)})")
    if not which:
        context.logger.info("[DIAG] Nenhum diagnóstico pedido")
        return []

    inputs = _DiagnosticInputs(context, checkpoint)
    os.makedirs(context.diagnostics_dir, exist_ok=True)
    written: List[str] = []
    for name in dict.fromkeys(which):
        written.extend(_DIAGNOSTIC_WRITERS[name](inputs, context.diagnostics_dir))
    context.record_command("diagnose", {"which": list(dict.fromkeys(which)),
                                        "files": [os.path.relpath(p, context.run_dir) for p in written]})
    return written


def online_records(metrics_path: str, seed: int) -> List[Dict[str, Any]]:
    """Linhas online do CSV no formato de run_statistics."""
    return [{"seed": seed, "episode": row["index"], "success": bool(row["success"]), "fault": bool(row["fault"])}
            for row in read_metrics(metrics_path) if row["phase"] == "online"]


# ========== PIPELINE ==========

def run_pipeline(context: RunContext) -> EvalResult:
    """collect (se faltar o dataset) -> offline -> online -> avaliação do checkpoint final."""
    if not os.path.exists(context.dataset_path):
        cmd_collect(context)
    cmd_train_offline(context)
    cmd_train_online(context)
    return cmd_evaluate(context, "checkpoint", context.online_checkpoint)


# ========== SWEEP ==========

@dataclass
class SweepRun:
    tag: str
    seed: int
    run_dir: str
    overrides: List[str]
    returncode: Optional[int] = None


def parse_grid(grid: Sequence[str]) -> List[Tuple[str, List[str]]]:
    """
    "agent.beta=0,0.2" -> ("agent.beta", ["0", "0.2"]).

    Raises:
        ConfigurationError: item sem '=' ou sem valores
    """
    axes = []
    for item in grid:
        if "=" not in item:
            raise ConfigurationError(f"Item de grade sem '=': {item}")
        key, raw = item.split("=", 1)
        values = [v.strip() for v in raw.split(",") if v.strip()]
        if not values:
            raise ConfigurationError(f"Item de grade sem valores: {item}")
        axes.append((key.strip(), values))
    return axes


def _tag(assignment: Sequence[Tuple[str, str]]) -> str:
    if not assignment:
        return "base"
    text = "_".join(f"{key.split('.')[-1]}-{value}" for key, value in assignment)
    return re.sub(r"[^A-Za-z0-9_.-]", "", text)


def plan_sweep(config: ExperimentConfig, grid: Sequence[str], out_root: str) -> List[SweepRun]:
    """Produto cartesiano da grade × seeds; a configuração de cada ponto é validada aqui."""
    axes = parse_grid(grid)
    runs = []
    for values in itertools.product(*[v for _, v in axes]):
        assignment = list(zip([k for k, _ in axes], values))
        overrides = [f"{k}={v}" for k, v in assignment]
        point = experiment_config_from_dict(apply_overrides(config.to_dict(), overrides))
        tag = _tag(assignment)
        os.makedirs(os.path.join(out_root, tag), exist_ok=True)
        with open(os.path.join(out_root, tag, "config.json"), "w", encoding="utf-8") as fh:
            json.dump(point.to_dict(), fh, indent=2, sort_keys=True)
        for seed in point.seeds:
            runs.append(SweepRun(tag=tag, seed=seed, run_dir=os.path.join(out_root, tag, f"seed{seed}"),
                                 overrides=overrides))
    return runs


def _launch(run: SweepRun, out_root: str, main_path: str, logger: logging.Logger) -> SweepRun:
    command = [sys.executable, main_path, "pipeline",
               "--config", os.path.join(out_root, run.tag, "config.json"),
               "--seed", str(run.seed), "--out", run.run_dir]
    logger.info(f"[CLI] Sweep: {run.tag} seed {run.seed}")
    result = subprocess.run(command, capture_output=True, text=True)
    run.returncode = result.returncode
    if result.returncode != 0:
        logger.warning(f"[CLI] Sweep: {run.tag} seed {run.seed} terminou com código {result.returncode}: "
                       f"{result.stderr.strip()[-300:]}")
    return run


def cmd_sweep(config: ExperimentConfig, grid: Sequence[str], out_root: str, jobs: int = 1,
              main_path: Optional[str] = None, logger: Optional[logging.Logger] = None) -> Dict[str, Any]:
    """
    Roda o pipeline para cada ponto da grade e cada seed, em processos separados.

    Returns:
        Resumo gravado em <out>/sweep_summary.json
    """
    log = logger or logging.getLogger(__name__)
    if jobs < 1:
        raise ConfigurationError(f"jobs deve ser >= 1, recebido {jobs}")
    main_path = main_path or os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "main.py")
    runs = plan_sweep(config, grid, out_root)
    log.info(f"[CLI] Sweep: {len(runs)} execuções em {jobs} processo(s)")

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        finished = list(pool.map(lambda r: _launch(r, out_root, main_path, log), runs))

    summary: Dict[str, Any] = {"runs": [], "points": {}}
    for run in finished:
        entry = {"tag": run.tag, "seed": run.seed, "run_dir": run.run_dir, "overrides": run.overrides,
                 "returncode": run.returncode}
        metrics = os.path.join(run.run_dir, "metrics.csv")
        if run.returncode == 0 and os.path.exists(metrics):
            records = online_records(metrics, run.seed)
            entry["final_success"] = (float(np.mean([r["success"] for r in records[-50:]]))
                                      if records else None)
        summary["runs"].append(entry)

    for tag in dict.fromkeys(r.tag for r in finished):
        records = []
        for run in finished:
            metrics = os.path.join(run.run_dir, "metrics.csv")
            if run.tag == tag and run.returncode == 0 and os.path.exists(metrics):
                records.extend(online_records(metrics, run.seed))
        if not records:
            continue
        try:
            stats = run_statistics(records, config.success_window, config.bootstrap_resamples, log=log)
        except ConfigurationError as e:
            log.warning(f"[CLI] Sweep: estatísticas de {tag} omitidas: {e}")
            continue
        stats.to_csv(os.path.join(out_root, tag, "run_statistics.csv"))
        summary["points"][tag] = {"seeds": stats.seeds, "final_success": stats.final_success}

    with open(os.path.join(out_root, "sweep_summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
    failed = [r for r in finished if r.returncode != 0]
    if failed:
        log.warning(f"[CLI] Sweep: {len(failed)} de {len(finished)} execuções falharam")
    return summary


__all__ = [
    'DIAGNOSTICS', 'EVAL_POLICIES', 'build_env', 'build_buffer', 'check_dataset', 'cmd_collect',
    'cmd_train_offline', 'cmd_train_online', 'cmd_evaluate', 'cmd_diagnose', 'cmd_sweep', 'online_records',
    'parse_grid', 'plan_sweep', 'run_pipeline',
]

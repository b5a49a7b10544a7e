"""
Agent - Atualizações de crítico, ator, temperatura e BC
=======================================================
Um único Agent atende todos os algoritmos; o AlgorithmSpec registrado
para o nome do algoritmo decide:

- simplified_q: TD semi-gradiente sem rede alvo + α·CQL + β·regularizador NTK
- sac_cql:      TD com rede alvo (duplo Q, mínimo) + α·CQL
- crossq:       TD com forward conjunto (s, a) ∪ (s′, a′) em batch_norm, sem alvo
- dr3:          sac_cql + β·regularizador DR3
- layernorm:    sac_cql com crítico layer_norm
- bc:           apenas MSE entre tanh(média) e a ação registrada

Sorteios de cada atualização do crítico são feitos de uma vez, na mesma
ordem, independentemente de α e β: mudar um peso não muda as amostras.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional

import numpy as np

from agents.losses import (
    CriticPass, cql_penalty, critic_pass, dr3_reg_loss, ntk_reg_loss,
    sample_ood_actions, td_loss, td_targets,
)
from agents.networks import Critic, Policy
from config.config_completa import AgentConfig
from core.autodiff import MlpParams, TapeGradients
from core.checkpoint import adam_from_dict, adam_to_dict, params_from_dict, params_to_dict
from core.errors import ConfigurationError, OptimizerFault
from core.optim import AdamState, adam_step, adam_update_tensors
from core.registry import Registry
from replay.transitions import TransitionBatch


@dataclass(frozen=True)
class AlgorithmSpec:
    """Como o algoritmo monta o objetivo do crítico."""
    name: str
    regularizer: str = "none"       # none | ntk | dr3
    joint_batch: bool = False
    trains_critic: bool = True


ALGORITHM_REGISTRY = Registry("algoritmo")
for _spec in (
    AlgorithmSpec("simplified_q", regularizer="ntk"),
    AlgorithmSpec("sac_cql"),
    AlgorithmSpec("crossq", joint_batch=True),
    AlgorithmSpec("dr3", regularizer="dr3"),
    AlgorithmSpec("layernorm"),
    AlgorithmSpec("bc", trains_critic=False),
):
    ALGORITHM_REGISTRY.register(_spec.name, lambda spec=_spec: spec, singleton=True)


@dataclass
class LossReport:
    """Componentes (sem peso) e total ponderado de uma atualização do crítico."""
    td: float = 0.0
    cql: float = 0.0
    reg: float = 0.0
    total: float = 0.0
    q_mean: float = 0.0
    diverged: bool = False


@dataclass
class ActorReport:
    actor: float = 0.0
    temperature: float = 0.0
    entropy: float = 0.0
    diverged: bool = False


@dataclass
class CriticNoise:
    """Todos os sorteios de uma atualização do crítico, em ordem fixa."""
    next_eps: np.ndarray
    ood: np.ndarray
    reg_uniform: np.ndarray
    reg_eps: np.ndarray
    permutation: np.ndarray

    @classmethod
    def draw(cls, rng: np.random.Generator, batch_size: int, act_dim: int,
             config: AgentConfig) -> "CriticNoise":
        k = config.ood_action_samples
        m = batch_size * config.ntk_action_samples
        next_eps = rng.standard_normal((batch_size, act_dim))
        if config.mu_mode == "uniform":
            ood = rng.random((batch_size, k, act_dim))
        else:
            ood = rng.standard_normal((batch_size, k, act_dim))
        return cls(next_eps=next_eps, ood=ood, reg_uniform=rng.random((m, act_dim)),
                   reg_eps=rng.standard_normal((m, act_dim)),
                   permutation=rng.permutation(batch_size))


def target_sync(critic: MlpParams, target: MlpParams, polyak: float) -> MlpParams:
    """
    target ← polyak·target + (1 − polyak)·critic, elemento a elemento.

    Estatísticas de batch_norm seguem a mesma média.
    """
    if set(critic.tensors) != set(target.tensors):
        raise ConfigurationError("Crítico e alvo com tensores diferentes")
    for name, value in critic.tensors.items():
        if value.shape != target.tensors[name].shape:
            raise ConfigurationError(f"{name}: crítico {value.shape}, alvo {target.tensors[name].shape}")
        target.tensors[name] = polyak * target.tensors[name] + (1.0 - polyak) * value
    for key in critic.running_mean:
        target.running_mean[key] = polyak * target.running_mean[key] + (1.0 - polyak) * critic.running_mean[key]
        target.running_var[key] = polyak * target.running_var[key] + (1.0 - polyak) * critic.running_var[key]
    target.mark_modified()
    return target


class Agent:
    """
    Ator-crítico configurável.

    Estado: críticos (e alvos, quando o algoritmo usa), política, log da
    temperatura, estados do Adam, contador de passos e registro de faults
    de divergência.
    """

    def __init__(self, config: AgentConfig, obs_dim: int, act_dim: int,
                 action_low: Optional[np.ndarray] = None, action_high: Optional[np.ndarray] = None,
                 rng: Optional[np.random.Generator] = None, logger: Optional[logging.Logger] = None,
                 build: bool = True):
        self.config = config
        self.spec: AlgorithmSpec = ALGORITHM_REGISTRY.resolve(config.algorithm)
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        self.action_low = -np.ones(act_dim) if action_low is None else np.asarray(action_low, dtype=np.float64)
        self.action_high = np.ones(act_dim) if action_high is None else np.asarray(action_high, dtype=np.float64)
        self.logger = logger or logging.getLogger(__name__)

        self.critics: List[Critic] = []
        self.target_critics: Optional[List[Critic]] = None
        self.critic_optimizers: List[AdamState] = []
        self.gradient_steps = 0
        self.faults: List[Dict[str, Any]] = []
        self.target_entropy = (config.target_entropy if config.target_entropy is not None
                               else -float(act_dim))
        self._log_alpha = {"log_alpha": np.array([np.log(config.init_temperature)])}
        self.temperature_optimizer = AdamState.for_tensors(self._log_alpha, config.lr)

        if build:
            self._build(rng if rng is not None else np.random.default_rng(0))

    def _build(self, rng: np.random.Generator):
        cfg = self.config
        self.policy = Policy(self.obs_dim, self.act_dim, cfg.policy_hidden, cfg.policy_depth,
                             self.action_low, self.action_high, rng=rng)
        self.policy_optimizer = AdamState.for_params(self.policy.params, cfg.lr)
        if self.spec.trains_critic:
            for _ in range(cfg.n_critics):
                critic = Critic(self.obs_dim, self.act_dim, cfg.critic_hidden, cfg.critic_depth,
                                norm=cfg.critic_norm, rng=rng)
                self.critics.append(critic)
                self.critic_optimizers.append(AdamState.for_params(critic.params, cfg.lr))
            if cfg.uses_target:
                self.target_critics = [c.copy() for c in self.critics]
        self.logger.info(f"[AGENT] {cfg.algorithm}: {len(self.critics)} crítico(s) "
                         f"({sum(c.params.num_parameters() for c in self.critics)} parâmetros), "
                         f"rede alvo={'sim' if self.target_critics else 'não'}")

    # ========== PROPRIEDADES ==========

    @property
    def temperature(self) -> float:
        if self.config.entropy_mode == "auto":
            return float(np.exp(self._log_alpha["log_alpha"][0]))
        return float(self.config.entropy_fixed_value)

    @property
    def critic(self) -> Optional[Critic]:
        """Primeiro crítico (o usado pelos diagnósticos)."""
        return self.critics[0] if self.critics else None

    def networks(self) -> List[MlpParams]:
        """Todos os parâmetros, na ordem do checksum."""
        params = [self.policy.params] + [c.params for c in self.critics]
        if self.target_critics:
            params += [c.params for c in self.target_critics]
        return params

    def set_learning_rate(self, lr: float):
        for state in self.critic_optimizers + [self.policy_optimizer, self.temperature_optimizer]:
            state.lr = lr

    def _record_fault(self, kind: str, reason: str):
        self.faults.append({"step": self.gradient_steps, "kind": kind, "reason": reason})
        self.logger.warning(f"[AGENT] Divergência em {kind} (passo {self.gradient_steps}): {reason}; "
                            f"atualização descartada")

    # ========== CRÍTICO ==========

    def _running_stats(self):
        return [({k: v.copy() for k, v in c.params.running_mean.items()},
                 {k: v.copy() for k, v in c.params.running_var.items()}) for c in self.critics]

    def _restore_running_stats(self, snapshot):
        # médias do batch_norm voltam ao estado anterior ao passo descartado
        for critic, (mean, var) in zip(self.critics, snapshot):
            critic.params.running_mean = mean
            critic.params.running_var = var

    def _data_passes(self, batch: TransitionBatch, noise: CriticNoise, temperature: float):
        """Forwards sobre (s, a) de cada crítico e os alvos y."""
        B = len(batch)
        if self.spec.joint_batch:
            a_next = self.policy.sample(batch.s_target, None, eps=noise.next_eps).action
            s_all = np.concatenate([batch.s, batch.s_target])
            a_all = np.concatenate([batch.a, a_next])
            joints = [critic_pass(c, s_all, a_all, "train", update_stats=True) for c in self.critics]
            next_q = np.min([j.output.q[B:] for j in joints], axis=0)
            targets = td_targets(None, batch, self.policy, self.config.gamma, temperature=temperature,
                                 eps=noise.next_eps, next_q=next_q)
            return [CriticPass(j.output, j.tape, B) for j in joints], targets

        source = self.target_critics if self.target_critics else self.critics
        targets = td_targets(source, batch, self.policy, self.config.gamma, temperature=temperature,
                             eps=noise.next_eps)
        return [critic_pass(c, batch.s, batch.a, "train") for c in self.critics], targets

    def critic_loss(self, critic: Critic, data: CriticPass, targets: np.ndarray, batch: TransitionBatch,
                    noise: CriticNoise, reg_states: np.ndarray):
        """(perda composta, td, cql, reg) de um crítico."""
        cfg = self.config
        td = td_loss(data, targets)
        total = td
        cql_value = reg_value = 0.0
        if cfg.cql_weight > 0.0:
            ood_actions = sample_ood_actions(self.policy, batch.s, cfg.mu_mode, cfg.ood_action_samples,
                                             draws=noise.ood)
            cql = cql_penalty(critic, batch, self.policy, cfg.mu_mode, cfg.weighted_cql,
                              cfg.ood_action_samples, data_term=cfg.cql_data_term,
                              ood_actions=ood_actions, data=data)
            cql_value = cql.value
            total = total + cql.scaled(cfg.cql_weight)
        if cfg.regularizer_weight > 0.0 and self.spec.regularizer != "none":
            if self.spec.regularizer == "ntk":
                a_uniform = self.action_low + (self.action_high - self.action_low) * noise.reg_uniform
                reg = ntk_reg_loss(critic, batch.s, reg_states, self.policy,
                                   action_samples=cfg.ntk_action_samples,
                                   a_uniform=a_uniform, eps_policy=noise.reg_eps)
            else:
                reg = dr3_reg_loss(critic, batch)
            reg_value = reg.value
            total = total + reg.scaled(cfg.regularizer_weight)
        return total, td.value, cql_value, reg_value

    def critic_update(self, batch: TransitionBatch, rng: np.random.Generator,
                      reg_states: Optional[np.ndarray] = None) -> LossReport:
        """
        Um passo de Adam no objetivo composto do algoritmo.

        Args:
            batch: Batch de sample_symmetric
            rng: Gerador dos sorteios (a′, μ, a_u, a′_π)
            reg_states: Segundo batch de estados, independente (regularizador
                NTK); sem ele usa uma permutação dos estados do batch

        Returns:
            LossReport com a média dos componentes entre críticos; com perda
            ou gradiente não finito, diverged=True e nada é alterado
        """
        if not self.spec.trains_critic:
            raise ConfigurationError(f"{self.config.algorithm} não treina crítico")
        noise = CriticNoise.draw(rng, len(batch), self.act_dim, self.config)
        if reg_states is None:
            reg_states = batch.s[noise.permutation]
        temperature = self.temperature

        running_stats = self._running_stats()
        passes, targets = self._data_passes(batch, noise, temperature)
        parts = [self.critic_loss(c, p, targets, batch, noise, reg_states)
                 for c, p in zip(self.critics, passes)]
        report = LossReport(
            td=float(np.mean([p[1] for p in parts])),
            cql=float(np.mean([p[2] for p in parts])),
            reg=float(np.mean([p[3] for p in parts])),
            total=float(np.mean([p[0].value for p in parts])),
            q_mean=float(np.mean([p.q for p in passes])),
        )
        if not np.isfinite(report.total):
            report.diverged = True
            self._record_fault("critic", f"perda não finita ({report.total})")
            self._restore_running_stats(running_stats)
            return report

        grads: List[TapeGradients] = [part[0].gradients(c) for c, part in zip(self.critics, parts)]
        try:
            if not all(g.is_finite() for g in grads):
                raise OptimizerFault("gradiente não finito no crítico")
            for critic, g, state in zip(self.critics, grads, self.critic_optimizers):
                adam_step(critic.params, g, state)
        except OptimizerFault as exc:
            report.diverged = True
            self._record_fault("critic", str(exc))
            self._restore_running_stats(running_stats)
            return report

        if self.target_critics:
            for critic, target in zip(self.critics, self.target_critics):
                target_sync(critic.params, target.params, self.config.polyak)
        self.gradient_steps += 1
        return report

    # ========== ATOR ==========

    def actor_update(self, states: np.ndarray, rng: np.random.Generator) -> ActorReport:
        """
        Um passo de Adam em média(τ·log π(a|s) − Q(s, a)), a reparametrizado.

        Com entropy_mode auto, log τ também dá um passo rumo à entropia alvo.
        """
        if not self.critics:
            raise ConfigurationError(f"{self.config.algorithm} não tem crítico para o ator")
        states = np.atleast_2d(np.asarray(states, dtype=np.float64))
        B = len(states)
        eps = rng.standard_normal((B, self.act_dim))
        tau = self.temperature
        value, grads, sample = actor_loss_and_gradients(self.policy, self.critics, states, eps, tau)
        report = ActorReport(actor=value, temperature=tau, entropy=float(-np.mean(sample.log_prob)))
        if not np.isfinite(value) or not grads.is_finite():
            report.diverged = True
            self._record_fault("actor", f"perda ou gradiente não finito ({value})")
            return report
        adam_step(self.policy.params, grads, self.policy_optimizer)

        if self.config.entropy_mode == "auto":
            grad = -float(np.mean(sample.log_prob + self.target_entropy))
            if np.isfinite(grad):
                adam_update_tensors(self._log_alpha, {"log_alpha": np.array([grad])},
                                    self.temperature_optimizer)
        return report

    # ========== BC ==========

    def bc_update(self, states: np.ndarray, actions: np.ndarray) -> float:
        """Um passo de Adam em (1/B)·Σ‖a − π(s)‖²; devolve a perda antes do passo."""
        loss, grads = bc_loss_and_gradients(self.policy, states, actions)
        if not np.isfinite(loss) or not grads.is_finite():
            self._record_fault("bc", f"perda ou gradiente não finito ({loss})")
            return loss
        adam_step(self.policy.params, grads, self.policy_optimizer)
        self.gradient_steps += 1
        return loss

    # ========== CHECKPOINT ==========

    def state_dict(self) -> Dict[str, Any]:
        return {
            "agent_config": asdict(self.config),
            "obs_dim": self.obs_dim,
            "act_dim": self.act_dim,
            "action_low": self.action_low.tolist(),
            "action_high": self.action_high.tolist(),
            "policy": params_to_dict(self.policy.params),
            "policy_optimizer": adam_to_dict(self.policy_optimizer),
            "critics": [params_to_dict(c.params) for c in self.critics],
            "critic_optimizers": [adam_to_dict(s) for s in self.critic_optimizers],
            "target_critics": (None if self.target_critics is None
                               else [params_to_dict(c.params) for c in self.target_critics]),
            "log_alpha": float(self._log_alpha["log_alpha"][0]),
            "temperature_optimizer": adam_to_dict(self.temperature_optimizer),
            "gradient_steps": self.gradient_steps,
            "faults": self.faults,
        }

    @classmethod
    def from_state_dict(cls, data: Dict[str, Any], logger: Optional[logging.Logger] = None) -> "Agent":
        config = AgentConfig(**data["agent_config"])
        agent = cls(config, data["obs_dim"], data["act_dim"], np.array(data["action_low"]),
                    np.array(data["action_high"]), logger=logger, build=False)
        agent.policy = Policy(agent.obs_dim, agent.act_dim, action_low=agent.action_low,
                              action_high=agent.action_high, params=params_from_dict(data["policy"]))
        agent.policy_optimizer = adam_from_dict(data["policy_optimizer"])
        agent.critics = [Critic(agent.obs_dim, agent.act_dim, norm=config.critic_norm,
                                depth=config.critic_depth, params=params_from_dict(p))
                         for p in data["critics"]]
        agent.critic_optimizers = [adam_from_dict(s) for s in data["critic_optimizers"]]
        if data["target_critics"] is not None:
            agent.target_critics = [Critic(agent.obs_dim, agent.act_dim, norm=config.critic_norm,
                                           depth=config.critic_depth, params=params_from_dict(p))
                                    for p in data["target_critics"]]
        agent._log_alpha = {"log_alpha": np.array([data["log_alpha"]])}
        agent.temperature_optimizer = adam_from_dict(data["temperature_optimizer"])
        agent.gradient_steps = data["gradient_steps"]
        agent.faults = list(data["faults"])
        return agent


def actor_loss_and_gradients(policy: Policy, critics: List[Critic], states: np.ndarray, eps: np.ndarray,
                             temperature: float):
    """
    média(τ·log π(a|s) − min_k Q_k(s, a)) com a = a(s, eps) reparametrizado.

    Returns:
        (valor, gradientes da política, amostra usada)
    """
    B = len(states)
    sample = policy.sample(states, None, eps=eps)
    evaluated = [c.q_and_action_grad(states, sample.action) for c in critics]
    q_all = np.stack([q for q, _ in evaluated])
    chosen = np.argmin(q_all, axis=0)
    q = q_all[chosen, np.arange(B)]
    dq_da = np.stack([g for _, g in evaluated])[chosen, np.arange(B)]
    value = float(np.mean(temperature * sample.log_prob - q))
    grads = policy.backward_sample(sample, -dq_da / B, np.full(B, temperature / B))
    return value, grads, sample


def bc_loss_and_gradients(policy: Policy, states: np.ndarray, actions: np.ndarray):
    """(1/B)·Σ‖a − tanh(média)‖² e o gradiente em relação à política."""
    states = np.atleast_2d(np.asarray(states, dtype=np.float64))
    actions = np.atleast_2d(np.asarray(actions, dtype=np.float64))
    predicted, tape = policy.deterministic(states)
    diff = predicted - actions
    B = len(states)
    loss = float(np.sum(diff ** 2) / B)
    return loss, policy.backward_deterministic(tape, 2.0 * diff / B)

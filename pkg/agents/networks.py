"""
Networks - Crítico com cabeça linear e política tanh-gaussiana
==============================================================
Crítico: MLP relu sobre concat(s, a); a última camada é linear e sem viés,
então Q(s, a) = wᵀΦ(s, a) vale exatamente, com Φ a saída da penúltima
camada. Normalização nas camadas ocultas conforme o algoritmo
(batch_norm para crossq, layer_norm para o baseline layernorm).

Política: MLP tanh produzindo (média, log-desvio) por dimensão de ação;
log-desvio cortado em [−5, 2]; ação = tanh(u) escalada para os limites,
u ~ N(média, desvio²). log π inclui a correção da mudança de variável.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from core.autodiff import MlpParams, Tape, TapeGradients, backward, build_layers, forward, init_mlp
from core.errors import ConfigurationError
from interfaces.rl_interfaces import IActionSource, IQFunction

LOG_STD_MIN = -5.0
LOG_STD_MAX = 2.0
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass
class CriticOutput:
    """Q escalar (ou batch [B]) e features Φ [B×d] da penúltima camada."""
    q: np.ndarray
    phi: np.ndarray


class Critic(IQFunction):
    """
    Crítico Q_θ(s, a) = wᵀΦ(s, a).

    feature_layer é o índice da última camada oculta; gradientes de perdas
    sobre Φ entram no backward por esse índice.
    """

    def __init__(self, obs_dim: int, act_dim: int, hidden: int = 256, depth: int = 2,
                 norm: str = "none", rng: Optional[np.random.Generator] = None,
                 params: Optional[MlpParams] = None):
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        self.depth = depth
        self.norm = norm
        if params is None:
            layers = build_layers([obs_dim + act_dim] + [hidden] * depth + [1], "relu", "identity",
                                  hidden_norm=norm, output_bias=False)
            params = init_mlp(layers, rng if rng is not None else np.random.default_rng(0))
        if params.in_dim != obs_dim + act_dim or params.out_dim != 1 or params.layers[-1].bias:
            raise ConfigurationError("Crítico requer entrada obs+act, saída 1 e última camada sem viés")
        self.params = params

    @property
    def feature_layer(self) -> int:
        return len(self.params.layers) - 2

    @property
    def last_weight(self) -> np.ndarray:
        """w da cabeça linear, [d]."""
        return self.params.tensors[f"W{len(self.params.layers) - 1}"][0]

    def copy(self) -> "Critic":
        return Critic(self.obs_dim, self.act_dim, depth=self.depth, norm=self.norm, params=self.params.copy())

    def _inputs(self, s: np.ndarray, a: np.ndarray) -> np.ndarray:
        s = np.atleast_2d(np.asarray(s, dtype=np.float64))
        a = np.atleast_2d(np.asarray(a, dtype=np.float64))
        if s.shape[1] != self.obs_dim or a.shape[1] != self.act_dim or s.shape[0] != a.shape[0]:
            raise ConfigurationError(f"Formas incompatíveis: s {s.shape}, a {a.shape} "
                                     f"(esperado obs {self.obs_dim}, act {self.act_dim})")
        return np.concatenate([s, a], axis=1)

    def forward(self, s: np.ndarray, a: np.ndarray, mode: str = "eval",
                update_stats: bool = True) -> Tuple[CriticOutput, Tape]:
        out, tape = forward(self.params, self._inputs(s, a), mode, update_stats)
        return CriticOutput(q=out[:, 0], phi=tape.hidden(self.feature_layer)), tape

    def backward(self, tape: Tape, dq: np.ndarray, dphi: Optional[np.ndarray] = None) -> TapeGradients:
        """Gradientes de Σ dq·Q + Σ dphi·Φ."""
        hidden = {self.feature_layer: dphi} if dphi is not None else None
        return backward(tape, np.asarray(dq, dtype=np.float64).reshape(-1, 1), hidden)

    # ========== IQFunction ==========

    def q_values(self, s: np.ndarray, a: np.ndarray) -> np.ndarray:
        return critic_forward(self, s, a).q

    def features(self, s: np.ndarray, a: np.ndarray) -> np.ndarray:
        return critic_forward(self, s, a).phi

    def q_and_action_grad(self, s: np.ndarray, a: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        output, tape = self.forward(s, a, "eval")
        grads = self.backward(tape, np.ones_like(output.q))
        return output.q, grads.input_grad[:, self.obs_dim:]


def critic_forward(critic: Critic, s: np.ndarray, a: np.ndarray, mode: str = "eval") -> CriticOutput:
    """Q e Φ; normalização conforme o crítico (modo train atualiza médias móveis)."""
    return critic.forward(s, a, mode)[0]


@dataclass
class PolicySample:
    """Amostra reparametrizada com tudo que o backward precisa."""
    action: np.ndarray
    log_prob: np.ndarray
    u: np.ndarray
    eps: np.ndarray
    mean: np.ndarray
    log_std: np.ndarray
    unclamped: np.ndarray
    tape: Tape


def _log_one_minus_tanh_sq(u: np.ndarray) -> np.ndarray:
    """log(1 − tanh²u) numericamente estável."""
    return 2.0 * (np.log(2.0) - u - np.logaddexp(0.0, -2.0 * u))


class Policy(IActionSource):
    """Política tanh-gaussiana diagonal."""

    name = "policy"

    def __init__(self, obs_dim: int, act_dim: int, hidden: int = 64, depth: int = 2,
                 action_low: Optional[np.ndarray] = None, action_high: Optional[np.ndarray] = None,
                 rng: Optional[np.random.Generator] = None, params: Optional[MlpParams] = None):
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        self.depth = depth
        low = -np.ones(act_dim) if action_low is None else np.asarray(action_low, dtype=np.float64)
        high = np.ones(act_dim) if action_high is None else np.asarray(action_high, dtype=np.float64)
        self.action_scale = (high - low) / 2.0
        self.action_bias = (high + low) / 2.0
        if params is None:
            layers = build_layers([obs_dim] + [hidden] * depth + [2 * act_dim], "tanh", "identity")
            params = init_mlp(layers, rng if rng is not None else np.random.default_rng(0))
        if params.in_dim != obs_dim or params.out_dim != 2 * act_dim:
            raise ConfigurationError("Política requer entrada obs e saída 2·act")
        self.params = params

    def copy(self) -> "Policy":
        return Policy(self.obs_dim, self.act_dim, depth=self.depth,
                      action_low=self.action_bias - self.action_scale,
                      action_high=self.action_bias + self.action_scale, params=self.params.copy())

    # ========== DISTRIBUIÇÃO ==========

    def distribution(self, s: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, Tape]:
        """(média, log-desvio cortado, máscara de não-corte, tape)."""
        out, tape = forward(self.params, np.atleast_2d(np.asarray(s, dtype=np.float64)), "eval")
        mean = out[:, :self.act_dim]
        raw = out[:, self.act_dim:]
        log_std = np.clip(raw, LOG_STD_MIN, LOG_STD_MAX)
        unclamped = (raw > LOG_STD_MIN) & (raw < LOG_STD_MAX)
        return mean, log_std, unclamped, tape

    def _squash(self, u: np.ndarray) -> np.ndarray:
        return np.tanh(u) * self.action_scale + self.action_bias

    def _log_prob_from(self, u: np.ndarray, eps: np.ndarray, log_std: np.ndarray) -> np.ndarray:
        gaussian = np.sum(-0.5 * eps ** 2 - log_std - _HALF_LOG_2PI, axis=1)
        correction = np.sum(_log_one_minus_tanh_sq(u) + np.log(self.action_scale), axis=1)
        return gaussian - correction

    def sample(self, s: np.ndarray, rng: np.random.Generator,
               eps: Optional[np.ndarray] = None) -> PolicySample:
        """Amostra reparametrizada; `eps` fixo permite reproduzir a mesma amostra."""
        mean, log_std, unclamped, tape = self.distribution(s)
        if eps is None:
            eps = rng.standard_normal(mean.shape)
        u = mean + np.exp(log_std) * eps
        return PolicySample(action=self._squash(u), log_prob=self._log_prob_from(u, eps, log_std),
                            u=u, eps=eps, mean=mean, log_std=log_std, unclamped=unclamped, tape=tape)

    def log_prob(self, s: np.ndarray, a: np.ndarray) -> np.ndarray:
        """log π(a|s) para ações dentro dos limites."""
        mean, log_std, _, _ = self.distribution(s)
        y = (np.atleast_2d(np.asarray(a, dtype=np.float64)) - self.action_bias) / self.action_scale
        u = np.arctanh(np.clip(y, -1.0 + 1e-15, 1.0 - 1e-15))
        eps = (u - mean) / np.exp(log_std)
        return self._log_prob_from(u, eps, log_std)

    def deterministic(self, s: np.ndarray) -> Tuple[np.ndarray, Tape]:
        """tanh(média) nos limites, com o tape para o BC."""
        mean, _, _, tape = self.distribution(s)
        return self._squash(mean), tape

    # ========== BACKWARD ==========

    def backward_sample(self, sample: PolicySample, d_action: np.ndarray,
                        d_log_prob: np.ndarray) -> TapeGradients:
        """Gradientes de Σ d_action·a + Σ d_log_prob·log π pela reparametrização."""
        tanh_u = np.tanh(sample.u)
        d_log_prob = np.asarray(d_log_prob, dtype=np.float64).reshape(-1, 1)
        du = d_action * self.action_scale * (1.0 - tanh_u ** 2) + d_log_prob * 2.0 * tanh_u
        std = np.exp(sample.log_std)
        d_log_std = (du * std * sample.eps - d_log_prob) * sample.unclamped
        return backward(sample.tape, np.concatenate([du, d_log_std], axis=1))

    def backward_deterministic(self, tape: Tape, d_action: np.ndarray) -> TapeGradients:
        mean = tape.records[-1].h[:, :self.act_dim]
        d_mean = d_action * self.action_scale * (1.0 - np.tanh(mean) ** 2)
        return backward(tape, np.concatenate([d_mean, np.zeros_like(d_mean)], axis=1))

    # ========== IActionSource ==========

    def act(self, observation: np.ndarray, rng: np.random.Generator,
            deterministic: bool = False) -> np.ndarray:
        if deterministic:
            return self.deterministic(observation)[0][0]
        return policy_sample(self, observation, rng)[0][0]


def policy_sample(policy: Policy, s: np.ndarray, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """(a, log π(a|s)) com a dentro dos limites de ação."""
    sample = policy.sample(s, rng)
    return sample.action, sample.log_prob

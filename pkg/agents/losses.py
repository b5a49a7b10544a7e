"""
Losses - Objetivos do crítico e estimativa do kernel tangente
=============================================================
Cada perda devolve um CriticLoss: o valor escalar e as "peças" do backward
(tape, dQ, dΦ), uma por forward executado. O gradiente em relação aos
parâmetros é a soma dos backwards das peças, o que permite compor

    L_Q = L_TD + α·L_CQL + β·L_reg

somando gradientes escalados sem refazer forwards.

Perdas:
- td_loss: 0.5·média((Q − y)²), alvo y fixo (semi-gradiente)
- cql_penalty: E_μ[w·Q(s, a′)] − E_D[Q(s, a)], w = 1 − exp(−‖a − a′‖²) no modo ponderado
- ntk_reg_loss: média((Φ(s, a_u)·Φ(s′, a′_π))²), estados de dois batches independentes
- dr3_reg_loss: média(Φ(s, a)·Φ(s′, a′)) sobre pares consecutivos (com sinal)
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from agents.networks import Critic, CriticOutput, Policy
from core.autodiff import Tape, TapeGradients
from core.errors import ConfigurationError
from replay.transitions import TransitionBatch


@dataclass
class CriticPass:
    """Um forward do crítico; `rows` primeiras linhas pertencem ao batch de dados."""
    output: CriticOutput
    tape: Tape
    rows: int

    @property
    def q(self) -> np.ndarray:
        return self.output.q[:self.rows]


@dataclass
class CriticLoss:
    """Valor escalar mais as peças (tape, dQ, dΦ) do backward."""
    value: float
    pieces: List[Tuple[Tape, np.ndarray, Optional[np.ndarray]]] = field(default_factory=list)

    def scaled(self, factor: float) -> "CriticLoss":
        return CriticLoss(
            self.value * factor,
            [(tape, dq * factor, None if dphi is None else dphi * factor) for tape, dq, dphi in self.pieces],
        )

    def __add__(self, other: "CriticLoss") -> "CriticLoss":
        return CriticLoss(self.value + other.value, self.pieces + other.pieces)

    def gradients(self, critic: Critic) -> TapeGradients:
        total = TapeGradients.zeros_like(critic.params)
        for tape, dq, dphi in self.pieces:
            total = total + critic.backward(tape, dq, dphi)
        return total


def _padded(values: np.ndarray, total_rows: int) -> np.ndarray:
    """Completa com zeros as linhas de um forward conjunto que não pertencem ao termo."""
    out = np.zeros(total_rows)
    out[:len(values)] = values
    return out


def critic_pass(critic: Critic, s: np.ndarray, a: np.ndarray, mode: str = "train",
                update_stats: bool = False) -> CriticPass:
    output, tape = critic.forward(s, a, mode, update_stats)
    return CriticPass(output, tape, len(output.q))


def uniform_actions(rng: np.random.Generator, shape: Tuple[int, ...],
                    low: np.ndarray, high: np.ndarray) -> np.ndarray:
    return low + (high - low) * rng.random(shape)


# ========== ALVOS ==========

def td_targets(q_target: Union[Critic, Sequence[Critic]], batch: TransitionBatch, policy: Policy,
               gamma: float, rng: Optional[np.random.Generator] = None, temperature: float = 0.0,
               eps: Optional[np.ndarray] = None, next_q: Optional[np.ndarray] = None) -> np.ndarray:
    """
    y = R + bootstrap·γ^n_used·(Q̄(s_target, a′) − τ·log π(a′|s_target)), a′ ~ π(s_target).

    Args:
        q_target: Rede(s) alvo, ou o crítico atual (semi-gradiente); com
            várias redes usa o mínimo
        batch: Transições de N passos
        policy: Política que sorteia a′
        gamma: Desconto
        rng: Gerador do ruído de a′ (ou `eps` explícito)
        temperature: τ do bônus de entropia (0 desliga)
        next_q: Q̄ já avaliado (forward conjunto do crossq)

    Returns:
        Alvos [B], sem gradiente
    """
    sample = policy.sample(batch.s_target, rng, eps=eps)
    if next_q is None:
        critics = [q_target] if isinstance(q_target, Critic) else list(q_target)
        next_q = np.min([c.q_values(batch.s_target, sample.action) for c in critics], axis=0)
    soft_value = next_q - temperature * sample.log_prob if temperature > 0.0 else next_q
    discount = np.power(gamma, batch.n_used) * batch.bootstrap
    return batch.n_step_return + discount * soft_value


def td_loss(data: CriticPass, targets: np.ndarray) -> CriticLoss:
    """0.5·média((Q − y)²) com o alvo fixo."""
    error = data.q - targets
    B = len(error)
    value = 0.5 * float(np.mean(error ** 2))
    return CriticLoss(value, [(data.tape, _padded(error / B, len(data.output.q)), None)])


# ========== CQL ==========

def cql_weights(a: np.ndarray, a_ood: np.ndarray) -> np.ndarray:
    """1 − exp(−‖a − a′‖²) para a [B×act] e a′ [B×k×act] -> [B×k]."""
    a = np.asarray(a, dtype=np.float64)
    a_ood = np.asarray(a_ood, dtype=np.float64)
    if a_ood.ndim == a.ndim:
        a_ood = a_ood[:, None, :]
    return 1.0 - np.exp(-np.sum((a[:, None, :] - a_ood) ** 2, axis=2))


def sample_ood_actions(policy: Policy, s: np.ndarray, mu_mode: str, count: int,
                       rng: Optional[np.random.Generator] = None,
                       draws: Optional[np.ndarray] = None) -> np.ndarray:
    """
    a′ ~ μ, [B×k×act].

    `draws` fixa o sorteio: uniformes em [0, 1) para μ = U(A), normais
    padrão para μ = π.
    """
    B = len(s)
    shape = (B, count, policy.act_dim)
    low = policy.action_bias - policy.action_scale
    high = policy.action_bias + policy.action_scale
    if mu_mode == "uniform":
        u = rng.random(shape) if draws is None else draws
        return low + (high - low) * u
    if mu_mode == "policy":
        eps = rng.standard_normal(shape) if draws is None else draws
        s_rep = np.repeat(s, count, axis=0)
        sample = policy.sample(s_rep, rng, eps=eps.reshape(B * count, -1))
        return sample.action.reshape(shape)
    raise ConfigurationError(f"mu_mode desconhecido: {mu_mode}")


def cql_penalty(critic: Critic, batch: TransitionBatch, policy: Policy, mu_mode: str = "uniform",
                weighted: bool = True, ood_samples: int = 4, rng: Optional[np.random.Generator] = None,
                data_term: bool = True, ood_actions: Optional[np.ndarray] = None,
                data: Optional[CriticPass] = None, mode: str = "train") -> CriticLoss:
    """
    Penalidade conservadora.

    Não ponderada: média de Q(s, a′) sobre as amostras menos média de
    Q(s, a). Ponderada: o primeiro termo vira média de w·Q(s, a′).

    Args:
        ood_actions: a′ forçado [B×k×act] (senão sorteado de μ)
        data: Forward já feito sobre (s, a) (reaproveitado pelo TD)
    """
    if ood_samples < 1:
        raise ConfigurationError("ood_samples deve ser >= 1")
    s = batch.s
    B = len(s)
    if ood_actions is None:
        ood_actions = sample_ood_actions(policy, s, mu_mode, ood_samples, rng)
    k = ood_actions.shape[1]

    ood = critic_pass(critic, np.repeat(s, k, axis=0), ood_actions.reshape(B * k, -1), mode)
    weights = cql_weights(batch.a, ood_actions).reshape(-1) if weighted else np.ones(B * k)
    value = float(np.mean(weights * ood.q))
    loss = CriticLoss(value, [(ood.tape, weights / (B * k), None)])

    if data_term:
        if data is None:
            data = critic_pass(critic, s, batch.a, mode)
        loss = loss + CriticLoss(-float(np.mean(data.q)),
                                 [(data.tape, _padded(-np.ones(B) / B, len(data.output.q)), None)])
    return loss


# ========== REGULARIZADORES DE FEATURES ==========

def ntk_reg_value(phi_1: np.ndarray, phi_2: np.ndarray) -> float:
    """média((Φ₁ᵢ·Φ₂ᵢ)²) sobre linhas pareadas."""
    return float(np.mean(np.sum(phi_1 * phi_2, axis=1) ** 2))


def dr3_reg_value(phi: np.ndarray, phi_next: np.ndarray) -> float:
    """média(Φᵢ·Φ′ᵢ), com sinal."""
    return float(np.mean(np.sum(phi * phi_next, axis=1)))


def ntk_reg_loss(critic: Critic, states_1: np.ndarray, states_2: np.ndarray, policy: Policy,
                 rng: Optional[np.random.Generator] = None, action_samples: int = 1,
                 a_uniform: Optional[np.ndarray] = None, eps_policy: Optional[np.ndarray] = None,
                 mode: str = "train") -> CriticLoss:
    """
    Regularizador de decorrelação.

    a_u ~ U(A) nos estados do primeiro batch, a′_π ~ π(s′) nos do segundo;
    cada par de linhas recebe `action_samples` sorteios, todos na média.
    O gradiente flui pelos dois ramos de features (a amostra da política
    é tratada como constante).
    """
    if len(states_1) != len(states_2):
        raise ConfigurationError(f"Batches de estados com tamanhos {len(states_1)} e {len(states_2)}")
    s1 = np.repeat(np.asarray(states_1, dtype=np.float64), action_samples, axis=0)
    s2 = np.repeat(np.asarray(states_2, dtype=np.float64), action_samples, axis=0)
    M = len(s1)
    if a_uniform is None:
        a_uniform = uniform_actions(rng, (M, policy.act_dim),
                                    policy.action_bias - policy.action_scale,
                                    policy.action_bias + policy.action_scale)
    a_policy = policy.sample(s2, rng, eps=eps_policy).action

    branch_1 = critic_pass(critic, s1, a_uniform, mode)
    branch_2 = critic_pass(critic, s2, a_policy, mode)
    phi_1, phi_2 = branch_1.output.phi, branch_2.output.phi
    dots = np.sum(phi_1 * phi_2, axis=1)
    scale = (2.0 * dots / M)[:, None]
    return CriticLoss(float(np.mean(dots ** 2)), [
        (branch_1.tape, np.zeros(M), scale * phi_2),
        (branch_2.tape, np.zeros(M), scale * phi_1),
    ])


def dr3_reg_loss(critic: Critic, batch: TransitionBatch, mode: str = "train") -> CriticLoss:
    """
    Produto interno médio entre features de pares consecutivos (s, a), (s′, a′).

    Usa apenas as linhas com próximo par registrado; sem nenhuma, vale 0.
    """
    rows = np.flatnonzero(batch.has_next)
    if len(rows) == 0:
        return CriticLoss(0.0)
    current = critic_pass(critic, batch.s[rows], batch.a[rows], mode)
    following = critic_pass(critic, batch.s_next[rows], batch.a_next[rows], mode)
    phi, phi_next = current.output.phi, following.output.phi
    M = len(rows)
    return CriticLoss(dr3_reg_value(phi, phi_next), [
        (current.tape, np.zeros(M), phi_next / M),
        (following.tape, np.zeros(M), phi / M),
    ])


# ========== KERNEL TANGENTE ==========

def parameter_gradient(critic: Critic, s: np.ndarray, a: np.ndarray) -> np.ndarray:
    """∇_θ Q(s, a) achatado, para um único par."""
    output, tape = critic.forward(np.atleast_2d(s), np.atleast_2d(a), "eval")
    if len(output.q) != 1:
        raise ConfigurationError("parameter_gradient espera um único par (s, a)")
    return critic.backward(tape, np.ones(1)).flat()


def ntk_kernel_estimate(critic: Critic, first: Tuple[np.ndarray, np.ndarray],
                        second: Tuple[np.ndarray, np.ndarray], last_layer_only: bool = False) -> float:
    """
    κ = ∇_θQ(s′, a′)·∇_θQ(s, a), com os gradientes completos materializados.

    Com last_layer_only a soma fica restrita a w, onde ∇_w Q = Φ e κ = Φ·Φ′.
    """
    if last_layer_only:
        phi_1 = critic.features(np.atleast_2d(first[0]), np.atleast_2d(first[1]))[0]
        phi_2 = critic.features(np.atleast_2d(second[0]), np.atleast_2d(second[1]))[0]
        return float(np.dot(phi_1, phi_2))
    return float(np.dot(parameter_gradient(critic, *first), parameter_gradient(critic, *second)))

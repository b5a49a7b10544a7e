"""
Testes Unitários para os objetivos do crítico
Valores contra fórmulas diretas e gradientes contra diferenças centrais,
com todos os sorteios fixados.
"""

import numpy as np
import pytest

from agents.agent import actor_loss_and_gradients, bc_loss_and_gradients
from agents.losses import (
    cql_penalty, cql_weights, critic_pass, dr3_reg_loss, dr3_reg_value, ntk_reg_loss, ntk_reg_value,
    sample_ood_actions, td_loss, td_targets,
)
from agents.networks import Critic, Policy
from core.autodiff import build_layers, init_mlp
from core.errors import ConfigurationError
from core.gradcheck import gradient_check
from envs.dataset import Trajectory
from replay.transitions import assemble_nstep_batch

INSTANCES = 100
TOLERANCE = 1e-4


@pytest.fixture
def ood_actions(small_batch):
    return np.random.default_rng(11).uniform(-1, 1, size=(len(small_batch), 3, 2))


class TestTargets:
    """Testes dos alvos de TD."""

    def test_formula(self, tiny_critic, tiny_policy, small_batch, rng):
        eps = rng.standard_normal((len(small_batch), 2))
        a_next = tiny_policy.sample(small_batch.s_target, None, eps=eps).action
        q_next = tiny_critic.q_values(small_batch.s_target, a_next)

        y = td_targets(tiny_critic, small_batch, tiny_policy, 0.9, eps=eps)

        expected = small_batch.n_step_return + 0.9 ** small_batch.n_used * q_next
        np.testing.assert_allclose(y, expected)

    def test_minimum_over_critics(self, tiny_policy, small_batch, rng):
        critics = [Critic(3, 2, hidden=8, rng=np.random.default_rng(k)) for k in range(2)]
        eps = rng.standard_normal((len(small_batch), 2))

        y = td_targets(critics, small_batch, tiny_policy, 0.9, eps=eps)
        singles = [td_targets(c, small_batch, tiny_policy, 0.9, eps=eps) for c in critics]

        np.testing.assert_allclose(y, np.minimum(*singles))

    def test_entropy_bonus(self, tiny_critic, tiny_policy, small_batch, rng):
        eps = rng.standard_normal((len(small_batch), 2))
        sample = tiny_policy.sample(small_batch.s_target, None, eps=eps)

        plain = td_targets(tiny_critic, small_batch, tiny_policy, 0.9, eps=eps)
        soft = td_targets(tiny_critic, small_batch, tiny_policy, 0.9, eps=eps, temperature=0.5)

        np.testing.assert_allclose(soft - plain, -0.5 * 0.9 ** small_batch.n_used * sample.log_prob, atol=1e-10)

    def test_absorbing_rows_do_not_bootstrap(self, tiny_critic, tiny_policy, small_batch, rng):
        batch = small_batch.take(np.arange(len(small_batch)))
        batch.bootstrap[:] = False

        y = td_targets(tiny_critic, batch, tiny_policy, 0.9, rng=rng)

        np.testing.assert_array_equal(y, batch.n_step_return)


class TestTdLoss:

    def test_value_and_gradient(self, tiny_critic, small_batch, rng):
        targets = rng.normal(size=len(small_batch))

        def objective(params):
            loss = td_loss(critic_pass(tiny_critic, small_batch.s, small_batch.a), targets)
            return loss.value, loss.gradients(tiny_critic)

        data = critic_pass(tiny_critic, small_batch.s, small_batch.a)
        assert td_loss(data, targets).value == pytest.approx(0.5 * np.mean((data.q - targets) ** 2))
        assert gradient_check(objective, tiny_critic.params) < 1e-4


class TestCql:
    """Testes da penalidade conservadora."""

    def test_weights(self):
        a = np.array([[0.0, 0.0]])
        a_ood = np.array([[[0.0, 0.0], [1.0, 1.0]]])

        np.testing.assert_allclose(cql_weights(a, a_ood), [[0.0, 1.0 - np.exp(-2.0)]])

    def test_unweighted_value(self, tiny_critic, tiny_policy, small_batch, ood_actions):
        loss = cql_penalty(tiny_critic, small_batch, tiny_policy, weighted=False, ood_actions=ood_actions)

        B, k = ood_actions.shape[:2]
        q_ood = tiny_critic.q_values(np.repeat(small_batch.s, k, axis=0), ood_actions.reshape(B * k, 2))
        q_data = tiny_critic.q_values(small_batch.s, small_batch.a)
        assert loss.value == pytest.approx(np.mean(q_ood) - np.mean(q_data))

    def test_ood_action_equal_to_data_gets_zero_weight(self, tiny_critic, tiny_policy, small_batch):
        same = small_batch.a[:, None, :]

        loss = cql_penalty(tiny_critic, small_batch, tiny_policy, weighted=True, ood_actions=same,
                           data_term=False)

        assert loss.value == pytest.approx(0.0)

    @pytest.mark.parametrize("weighted", [True, False])
    def test_gradient(self, tiny_critic, tiny_policy, small_batch, ood_actions, weighted):
        def objective(params):
            loss = cql_penalty(tiny_critic, small_batch, tiny_policy, weighted=weighted,
                               ood_actions=ood_actions)
            return loss.value, loss.gradients(tiny_critic)

        assert gradient_check(objective, tiny_critic.params) < 1e-4

    def test_ood_samples_in_bounds(self, tiny_policy, small_batch, rng):
        for mode in ("uniform", "policy"):
            actions = sample_ood_actions(tiny_policy, small_batch.s, mode, 4, rng)
            assert actions.shape == (len(small_batch), 4, 2)
            assert np.all(np.abs(actions) <= 1.0)

    def test_unknown_mu(self, tiny_policy, small_batch, rng):
        with pytest.raises(ConfigurationError):
            sample_ood_actions(tiny_policy, small_batch.s, "boltzmann", 2, rng)


class TestFeatureRegularizers:
    """Testes dos regularizadores NTK e DR3."""

    def test_ntk_value(self):
        phi_1 = np.array([[1.0, 2.0], [0.0, 1.0]])
        phi_2 = np.array([[3.0, 0.0], [1.0, 1.0]])

        assert ntk_reg_value(phi_1, phi_2) == pytest.approx((9.0 + 1.0) / 2)

    def test_dr3_value_keeps_sign(self):
        assert dr3_reg_value(np.array([[1.0, 0.0]]), np.array([[-2.0, 0.0]])) == pytest.approx(-2.0)

    def test_ntk_gradient_through_both_branches(self, tiny_critic, tiny_policy, small_batch, rng):
        s2 = small_batch.s[::-1].copy()
        a_uniform = rng.uniform(-1, 1, size=(len(small_batch) * 2, 2))
        eps = rng.standard_normal((len(small_batch) * 2, 2))

        def objective(params):
            loss = ntk_reg_loss(tiny_critic, small_batch.s, s2, tiny_policy, action_samples=2,
                                a_uniform=a_uniform, eps_policy=eps)
            return loss.value, loss.gradients(tiny_critic)

        assert gradient_check(objective, tiny_critic.params) < 1e-4

    def test_ntk_batches_must_pair(self, tiny_critic, tiny_policy, rng):
        with pytest.raises(ConfigurationError):
            ntk_reg_loss(tiny_critic, np.zeros((4, 3)), np.zeros((3, 3)), tiny_policy, rng)

    def test_dr3_gradient(self, tiny_critic, small_batch):
        def objective(params):
            loss = dr3_reg_loss(tiny_critic, small_batch)
            return loss.value, loss.gradients(tiny_critic)

        assert gradient_check(objective, tiny_critic.params) < 1e-4

    def test_dr3_without_pairs_is_zero(self, tiny_critic, small_batch):
        batch = small_batch.take(np.arange(len(small_batch)))
        batch.has_next[:] = False

        assert dr3_reg_loss(tiny_critic, batch).value == 0.0

    def test_composed_loss_gradient(self, tiny_critic, tiny_policy, small_batch, ood_actions, rng):
        targets = rng.normal(size=len(small_batch))

        def objective(params):
            data = critic_pass(tiny_critic, small_batch.s, small_batch.a)
            loss = (td_loss(data, targets)
                    + cql_penalty(tiny_critic, small_batch, tiny_policy, ood_actions=ood_actions, data=data).scaled(0.7)
                    + dr3_reg_loss(tiny_critic, small_batch).scaled(0.2))
            return loss.value, loss.gradients(tiny_critic)

        assert gradient_check(objective, tiny_critic.params) < 1e-4


# ============================================================================
# Gradientes em instâncias aleatórias
# ============================================================================

class RandomInstance:
    """Crítico, política e batch sorteados a partir de uma semente."""

    def __init__(self, seed: int):
        self.gen = np.random.default_rng(seed)
        # tanh: diferenças centrais não cruzam as quinas da relu
        layers = build_layers([5, 6, 6, 1], "tanh", "identity", output_bias=False)
        self.critic = Critic(3, 2, params=init_mlp(layers, self.gen))
        self.policy = Policy(3, 2, hidden=6, rng=self.gen)
        length = int(self.gen.integers(4, 9))
        trajectory = Trajectory(
            observations=self.gen.normal(size=(length + 1, 3)),
            actions=self.gen.uniform(-1.0, 1.0, size=(length, 2)),
            rewards=self.gen.normal(size=length),
            fault=bool(self.gen.integers(2)),
        )
        self.batch = assemble_nstep_batch(trajectory, int(self.gen.integers(1, 4)), 0.9)
        self.B = len(self.batch)


def worst_error(check):
    """(semente, erro) da pior instância."""
    errors = [check(RandomInstance(seed)) for seed in range(INSTANCES)]
    seed = int(np.argmax(errors))
    return seed, errors[seed]


class TestGradientsOnRandomInstances:
    """Cada perda contra diferenças centrais em 100 instâncias sorteadas."""

    def test_td(self):
        def check(inst):
            targets = inst.gen.normal(size=inst.B)

            def objective(params):
                loss = td_loss(critic_pass(inst.critic, inst.batch.s, inst.batch.a), targets)
                return loss.value, loss.gradients(inst.critic)
            return gradient_check(objective, inst.critic.params)

        seed, error = worst_error(check)
        assert error < TOLERANCE, f"semente {seed}: erro relativo {error:.2e}"

    @pytest.mark.parametrize("weighted", [True, False])
    def test_cql(self, weighted):
        def check(inst):
            ood = inst.gen.uniform(-1, 1, size=(inst.B, 3, 2))

            def objective(params):
                loss = cql_penalty(inst.critic, inst.batch, inst.policy, weighted=weighted, ood_actions=ood)
                return loss.value, loss.gradients(inst.critic)
            return gradient_check(objective, inst.critic.params)

        seed, error = worst_error(check)
        assert error < TOLERANCE, f"semente {seed}: erro relativo {error:.2e}"

    def test_ntk(self):
        def check(inst):
            s2 = inst.gen.normal(size=(inst.B, 3))
            a_uniform = inst.gen.uniform(-1, 1, size=(inst.B, 2))
            eps = inst.gen.standard_normal((inst.B, 2))

            def objective(params):
                loss = ntk_reg_loss(inst.critic, inst.batch.s, s2, inst.policy, a_uniform=a_uniform,
                                    eps_policy=eps)
                return loss.value, loss.gradients(inst.critic)
            return gradient_check(objective, inst.critic.params)

        seed, error = worst_error(check)
        assert error < TOLERANCE, f"semente {seed}: erro relativo {error:.2e}"

    def test_dr3(self):
        def check(inst):
            def objective(params):
                loss = dr3_reg_loss(inst.critic, inst.batch)
                return loss.value, loss.gradients(inst.critic)
            return gradient_check(objective, inst.critic.params)

        seed, error = worst_error(check)
        assert error < TOLERANCE, f"semente {seed}: erro relativo {error:.2e}"

    def test_actor(self):
        def check(inst):
            eps = inst.gen.standard_normal((inst.B, 2))
            temperature = float(inst.gen.uniform(0.05, 0.5))

            def objective(params):
                value, grads, _ = actor_loss_and_gradients(inst.policy, [inst.critic], inst.batch.s, eps,
                                                           temperature)
                return value, grads
            return gradient_check(objective, inst.policy.params)

        seed, error = worst_error(check)
        assert error < TOLERANCE, f"semente {seed}: erro relativo {error:.2e}"

    def test_bc(self):
        def check(inst):
            actions = inst.gen.uniform(-0.9, 0.9, size=(inst.B, 2))

            def objective(params):
                return bc_loss_and_gradients(inst.policy, inst.batch.s, actions)
            return gradient_check(objective, inst.policy.params)

        seed, error = worst_error(check)
        assert error < TOLERANCE, f"semente {seed}: erro relativo {error:.2e}"

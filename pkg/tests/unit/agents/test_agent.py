"""
Testes Unitários para o Agent
Cada algoritmo registrado atualiza, faults não alteram o estado, e o
checkpoint reproduz a execução.
"""

import json

import numpy as np
import pytest

from agents.agent import ALGORITHM_REGISTRY, Agent, bc_loss_and_gradients, target_sync
from config.config_completa import ALGORITHMS, AgentConfig, load_experiment_config
from core.checkpoint import params_checksum
from core.errors import ConfigurationError


def make_agent(algorithm: str = "simplified_q", seed: int = 0, **overrides) -> Agent:
    params = {"batch_size": 8, "critic_hidden": 8, "policy_hidden": 8, "lr": 1e-3, **overrides}
    return Agent(AgentConfig.for_algorithm(algorithm, **params), 3, 2, rng=np.random.default_rng(seed))


class TestAlgorithmRegistry:

    def test_every_algorithm_registered(self):
        assert set(ALGORITHM_REGISTRY.names()) == set(ALGORITHMS)

    @pytest.mark.parametrize("algorithm,critics,target", [
        ("simplified_q", 1, False), ("crossq", 1, False), ("sac_cql", 2, True),
        ("dr3", 2, True), ("layernorm", 2, True), ("bc", 0, False),
    ])
    def test_network_layout(self, algorithm, critics, target):
        agent = make_agent(algorithm)

        assert len(agent.critics) == critics
        assert (agent.target_critics is not None) == target

    def test_norms_follow_algorithm(self):
        assert "g0" in make_agent("crossq").critic.params.tensors
        assert make_agent("crossq").critic.params.layers[0].norm == "batch_norm"
        assert make_agent("layernorm").critic.params.layers[0].norm == "layer_norm"
        assert make_agent("simplified_q").critic.params.layers[0].norm == "none"


class TestCriticUpdate:
    """Testes do passo do crítico."""

    @pytest.mark.parametrize("algorithm", ["simplified_q", "sac_cql", "crossq", "dr3", "layernorm"])
    def test_update_changes_params(self, algorithm, small_batch):
        agent = make_agent(algorithm)
        before = params_checksum([c.params for c in agent.critics])

        report = agent.critic_update(small_batch, np.random.default_rng(1))

        assert not report.diverged
        assert np.isfinite(report.total)
        assert agent.gradient_steps == 1
        assert params_checksum([c.params for c in agent.critics]) != before

    def test_zero_weights_report_zero(self, small_batch):
        agent = make_agent("simplified_q", alpha=0.0, beta=0.0)

        report = agent.critic_update(small_batch, np.random.default_rng(1))

        assert report.cql == 0.0
        assert report.reg == 0.0
        assert report.total == pytest.approx(report.td)

    def test_weights_do_not_change_draws(self, small_batch):
        weighted = make_agent("simplified_q").critic_update(small_batch, np.random.default_rng(1))
        plain = make_agent("simplified_q", alpha=0.0, beta=0.0).critic_update(small_batch, np.random.default_rng(1))

        assert weighted.td == plain.td

    def test_total_is_weighted_sum(self, small_batch):
        report = make_agent("simplified_q", alpha=0.5, beta=0.25).critic_update(small_batch, np.random.default_rng(3))

        assert report.total == pytest.approx(report.td + 0.5 * report.cql + 0.25 * report.reg)

    def test_non_finite_loss_leaves_state(self, small_batch):
        agent = make_agent("sac_cql")
        batch = small_batch.take(np.arange(len(small_batch)))
        batch.n_step_return[0] = np.nan
        before = params_checksum(agent.networks())

        report = agent.critic_update(batch, np.random.default_rng(1))

        assert report.diverged
        assert params_checksum(agent.networks()) == before
        assert agent.gradient_steps == 0
        assert agent.faults[0]["kind"] == "critic"

    def test_crossq_from_loaded_config_has_no_cql(self, small_batch):
        config = load_experiment_config(None, ["agent.algorithm=crossq", "agent.batch_size=8",
                                               "agent.critic_hidden=8", "agent.policy_hidden=8"])
        agent = Agent(config.agent, 3, 2, rng=np.random.default_rng(0))

        report = agent.critic_update(small_batch, np.random.default_rng(1))

        assert report.cql == 0.0
        assert report.reg == 0.0
        assert report.total == pytest.approx(report.td)

    def test_crossq_running_stats_follow_successful_step(self, small_batch):
        agent = make_agent("crossq")
        before = agent.critic.params.running_mean[0].copy()

        agent.critic_update(small_batch, np.random.default_rng(1))

        assert not np.array_equal(agent.critic.params.running_mean[0], before)

    def test_crossq_divergence_keeps_running_stats(self, small_batch):
        agent = make_agent("crossq")
        batch = small_batch.take(np.arange(len(small_batch)))
        batch.n_step_return[:] = np.nan
        means = {k: v.copy() for k, v in agent.critic.params.running_mean.items()}
        variances = {k: v.copy() for k, v in agent.critic.params.running_var.items()}
        before = params_checksum(agent.networks())

        report = agent.critic_update(batch, np.random.default_rng(1))

        assert report.diverged
        assert params_checksum(agent.networks()) == before
        for key in means:
            np.testing.assert_array_equal(agent.critic.params.running_mean[key], means[key])
            np.testing.assert_array_equal(agent.critic.params.running_var[key], variances[key])

    def test_reg_states_are_used(self, small_batch):
        states = np.random.default_rng(4).normal(size=(len(small_batch), 3))
        a = make_agent("simplified_q").critic_update(small_batch, np.random.default_rng(1), reg_states=states)
        b = make_agent("simplified_q").critic_update(small_batch, np.random.default_rng(1))

        assert a.td == b.td
        assert a.reg != b.reg

    def test_bc_has_no_critic(self, small_batch):
        with pytest.raises(ConfigurationError):
            make_agent("bc").critic_update(small_batch, np.random.default_rng(0))


class TestTargetSync:

    def test_polyak_average(self, tiny_critic):
        target = tiny_critic.copy()
        target.params.tensors["W0"] = np.zeros_like(target.params.tensors["W0"])

        target_sync(tiny_critic.params, target.params, 0.75)

        np.testing.assert_allclose(target.params.tensors["W0"], 0.25 * tiny_critic.params.tensors["W0"])

    def test_polyak_one_keeps_target(self, tiny_critic):
        target = tiny_critic.copy()
        target.params.tensors["W1"] += 3.0
        expected = target.params.tensors["W1"].copy()

        target_sync(tiny_critic.params, target.params, 1.0)

        np.testing.assert_array_equal(target.params.tensors["W1"], expected)

    def test_target_moves_after_update(self, small_batch):
        agent = make_agent("sac_cql", target_polyak=0.5)
        before = params_checksum([c.params for c in agent.target_critics])

        agent.critic_update(small_batch, np.random.default_rng(0))

        assert params_checksum([c.params for c in agent.target_critics]) != before


class TestActorAndBc:
    """Testes do ator, da temperatura e do BC."""

    def test_actor_update_moves_policy_and_temperature(self, small_batch):
        agent = make_agent("simplified_q")
        policy_before = params_checksum([agent.policy.params])
        tau_before = agent.temperature

        report = agent.actor_update(small_batch.s, np.random.default_rng(2))

        assert not report.diverged
        assert report.temperature == tau_before
        assert params_checksum([agent.policy.params]) != policy_before
        assert agent.temperature != tau_before

    def test_fixed_temperature(self, small_batch):
        agent = make_agent("simplified_q", entropy_mode="fixed", entropy_fixed_value=0.0)

        agent.actor_update(small_batch.s, np.random.default_rng(2))

        assert agent.temperature == 0.0

    def test_bc_reduces_loss(self, small_batch):
        agent = make_agent("bc", lr=1e-2)
        first = agent.bc_update(small_batch.s, small_batch.a)
        for _ in range(50):
            last = agent.bc_update(small_batch.s, small_batch.a)

        assert last < first

    def test_bc_loss_formula(self, tiny_policy, small_batch):
        loss, _ = bc_loss_and_gradients(tiny_policy, small_batch.s, small_batch.a)
        predicted, _ = tiny_policy.deterministic(small_batch.s)

        assert loss == pytest.approx(np.sum((predicted - small_batch.a) ** 2) / len(small_batch))


class TestStateDict:

    @pytest.mark.parametrize("algorithm", ["simplified_q", "crossq", "dr3"])
    def test_round_trip_resumes_identically(self, algorithm, small_batch):
        agent = make_agent(algorithm)
        agent.critic_update(small_batch, np.random.default_rng(0))
        agent.set_learning_rate(5e-4)

        restored = Agent.from_state_dict(json.loads(json.dumps(agent.state_dict())))
        assert params_checksum(restored.networks()) == params_checksum(agent.networks())

        a = agent.critic_update(small_batch, np.random.default_rng(9))
        b = restored.critic_update(small_batch, np.random.default_rng(9))

        assert a.total == b.total
        assert params_checksum(restored.networks()) == params_checksum(agent.networks())
        assert restored.critic_optimizers[0].lr == 5e-4

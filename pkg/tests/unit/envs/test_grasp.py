"""
Testes Unitários para o ambiente de pegar-e-levantar
"""

import numpy as np
import pytest

from envs.dataset import rollout
from envs.demonstrators import GraspDemonstrator, RandomPolicy, demonstrator_for
from core.errors import ConfigurationError
from envs.grasp import ITEM_REST_Y, LIFT_THRESHOLD, MAX_SPEED, GraspEnv, grasp_reset, grasp_step


@pytest.fixture
def env():
    return GraspEnv(horizon=60)


class TestGraspDynamics:
    """Testes das regras do grasp."""

    def test_reset_layout(self, env):
        state = env.reset(0)

        assert state.observation.shape == (6,)
        assert state.observation[4] == 0.0
        assert state.observation[3] == pytest.approx(ITEM_REST_Y)
        assert env.sparse_reward

    def test_leaving_workspace_faults(self, env):
        state = env.reset(0)
        state.sim["gripper"] = np.array([0.01, 0.5])

        result = env.step(state, np.array([-1.0, 0.0, -1.0]))

        assert result.fault
        assert result.truncated
        assert result.state.sim["gripper"][0] == 0.0

    def test_grip_needs_proximity(self, env):
        state = env.reset(0)

        result = env.step(state, np.array([0.0, 0.0, 1.0]))

        assert not result.info["holding"]

    def test_held_item_rewards_above_threshold(self, env):
        state = env.reset(0)
        state.sim["gripper"] = np.array([0.5, LIFT_THRESHOLD + 0.1])
        state.sim["item"] = state.sim["gripper"].copy()
        state.sim["holding"] = True

        result = env.step(state, np.array([0.0, 0.0, 1.0]))

        assert result.reward == 1.0
        np.testing.assert_allclose(result.state.sim["item"], result.state.sim["gripper"])

    def test_release_drops_item(self, env):
        state = env.reset(0)
        state.sim["gripper"] = np.array([0.5, 0.8])
        state.sim["item"] = np.array([0.5, 0.8])
        state.sim["holding"] = True

        result = env.step(state, np.array([0.0, 0.0, -1.0]))

        assert result.reward == 0.0
        assert result.state.sim["item"][1] == pytest.approx(ITEM_REST_Y)

    def test_speed_limit(self, env):
        state = env.reset(0)
        before = state.sim["gripper"].copy()

        after = env.step(state, np.array([3.0, -3.0, -1.0])).state.sim["gripper"]

        np.testing.assert_allclose(np.abs(after - before), MAX_SPEED)

    def test_item_kept_after_failed_attempt(self, env):
        first = env.reset(0)
        first.sim["item"] = np.array([0.41, ITEM_REST_Y])

        second = env.reset(1, previous=first)

        assert second.sim["item"][0] == pytest.approx(0.41)

    def test_item_resampled_after_success(self, env):
        first = env.reset(0)
        first.sim["item"] = np.array([0.41, ITEM_REST_Y])
        first.sim["succeeded"] = True

        np.testing.assert_array_equal(env.reset(1, previous=first).sim["item"], env.reset(1).sim["item"])


class TestGraspDemonstrator:
    """Demonstrador roteirizado."""

    def test_factory(self):
        assert demonstrator_for("grasp").name == "grasp_scripted"
        with pytest.raises(ConfigurationError):
            demonstrator_for("pendulum")

    def test_scripted_policy_succeeds_on_most_seeds(self, env):
        demonstrator = GraspDemonstrator()
        returns = [rollout(env, demonstrator, seed, np.random.default_rng(seed))[0].episode_return
                   for seed in range(40)]

        assert np.mean(np.array(returns) > 0.0) >= 0.95

    def test_random_policy_rarely_succeeds(self, env):
        policy = RandomPolicy(3)
        returns = [rollout(env, policy, seed, np.random.default_rng(seed))[0].episode_return
                   for seed in range(40)]

        assert np.mean(np.array(returns) > 0.0) < 0.1

    def test_deterministic_rollout_repeats(self, env):
        demonstrator = GraspDemonstrator()
        a, _ = rollout(env, demonstrator, 3, np.random.default_rng(0))
        b, _ = rollout(env, demonstrator, 3, np.random.default_rng(0))

        np.testing.assert_array_equal(a.actions, b.actions)
        np.testing.assert_array_equal(a.observations, b.observations)


class TestFunctionalForms:

    def test_same_as_env(self, env):
        action = np.array([0.5, 0.5, 1.0])

        state = grasp_reset(8, horizon=60)
        result = grasp_step(state, action)
        expected = env.step(env.reset(8), action)

        np.testing.assert_array_equal(state.observation, env.reset(8).observation)
        np.testing.assert_array_equal(result.observation, expected.observation)
        assert result.fault == expected.fault

"""
Testes Unitários para o Trainer
Fases offline/online sobre o reacher curto, avaliação e divergência.
"""

import os
from unittest.mock import Mock

import numpy as np
import pytest

from agents.agent import Agent
from core.checkpoint import params_checksum
from core.errors import ConfigurationError, DivergenceError
from envs import make_env
from envs.dataset import collect_demonstrations
from envs.demonstrators import RandomPolicy, ReacherDemonstrator
from replay.dual_buffer import DualBuffer
from services.metrics import MetricsWriter, read_metrics
from services.trainer import (
    Trainer, TrainingRngs, eval_reset_seed, evaluate_policy, online_reset_seed, record_evaluation,
    restore_agent,
)


@pytest.fixture
def trainer_factory(tmp_path, tiny_experiment_config):
    """Trainer completo com 3 demonstrações do reacher em D_off."""

    def build(config=None, seed=0, subdir="run"):
        cfg = config or tiny_experiment_config
        env = make_env(cfg.env.name, **cfg.env.env_params())
        demos = collect_demonstrations(env, ReacherDemonstrator(), cfg.demonstrations, success_filter=False,
                                       seed=seed)
        rngs = TrainingRngs.for_seed(seed)
        buffer = DualBuffer(cfg.agent.n_step, cfg.agent.gamma, rng=rngs.buffer)
        buffer.add_offline(demos)
        agent = Agent(cfg.agent, env.obs_dim, env.act_dim, env.action_low, env.action_high,
                      rng=np.random.default_rng([seed, 1]))
        run_dir = tmp_path / subdir
        metrics = MetricsWriter(str(run_dir / "metrics.csv"))
        return Trainer(cfg, env, agent, buffer, rngs, seed, metrics, diagnostics_dir=str(run_dir / "diagnostics"))

    return build


class TestSeeds:

    def test_reset_seed_ranges_are_disjoint(self):
        collection = {s * 100_000 + k for s in range(3) for k in range(200)}
        online = {online_reset_seed(s, k) for s in range(3) for k in range(200)}
        evaluation = {eval_reset_seed(s, k) for s in range(3) for k in range(200)}

        assert not collection & online
        assert not online & evaluation

    def test_rngs_round_trip(self):
        rngs = TrainingRngs.for_seed(3)
        rngs.updates.normal()

        restored = TrainingRngs.from_state_dict(rngs.state_dict())

        assert restored.updates.normal() == rngs.updates.normal()
        assert restored.rollout.integers(1000) == rngs.rollout.integers(1000)


class TestOfflinePhase:
    """Testes da fase offline."""

    def test_rows_every_metrics_interval(self, trainer_factory):
        trainer = trainer_factory()

        trainer.run_offline(6, metrics_every=2)

        rows = read_metrics(trainer.metrics.path)
        assert [r["index"] for r in rows] == [2, 4, 6]
        assert all(r["phase"] == "offline" and r["loss_td"] is not None for r in rows)
        assert rows[-1]["updates"] == 6
        assert trainer.agent.gradient_steps == 6

    def test_last_partial_interval_written(self, trainer_factory):
        trainer = trainer_factory()

        trainer.run_offline(5, metrics_every=2)

        assert [r["index"] for r in read_metrics(trainer.metrics.path)] == [2, 4, 5]

    def test_periodic_diagnostics_append_q_trace(self, trainer_factory):
        trainer = trainer_factory()

        trainer.run_offline(6, metrics_every=2)

        # passo 0 e passo 3 (offline_diagnostics_every=3) e passo 6
        with open(os.path.join(trainer.diagnostics_dir, "q_trace.csv")) as fh:
            steps = {line.split(",")[1] for line in fh.read().splitlines()[1:]}
        assert steps == {"0", "3", "6"}

    def test_rejects_online_data(self, trainer_factory):
        trainer = trainer_factory()
        trainer.run_episode(0)

        with pytest.raises(ConfigurationError):
            trainer.run_offline(1)

    def test_divergence_stops_with_row(self, trainer_factory):
        trainer = trainer_factory()
        trainer.agent.critic_update = Mock(return_value=Mock(diverged=True))
        trainer.agent.faults.append({"kind": "critic", "reason": "perda td não finita"})

        with pytest.raises(DivergenceError):
            trainer.run_offline(10, metrics_every=5)

        rows = read_metrics(trainer.metrics.path)
        assert [r["index"] for r in rows] == [1]
        assert trainer.offline_steps_done == 1


class TestOnlinePhase:
    """Testes da fase online."""

    def test_one_row_per_episode(self, trainer_factory):
        trainer = trainer_factory()

        trainer.run_online(3)

        rows = [r for r in read_metrics(trainer.metrics.path) if r["phase"] == "online"]
        assert [r["index"] for r in rows] == [0, 1, 2]
        assert all(r["updates"] == 2 for r in rows)
        assert trainer.buffer.stats["online_episodes"] == 3
        assert trainer.agent.gradient_steps == 6

    def test_resume_from_episode(self, trainer_factory):
        trainer = trainer_factory()
        trainer.episodes_done = 2

        trainer.run_online(3)

        rows = read_metrics(trainer.metrics.path)
        assert [r["index"] for r in rows] == [2]

    def test_zero_updates_per_episode(self, trainer_factory, tiny_experiment_config):
        config = tiny_experiment_config.with_overrides(["agent.updates_per_episode=0"])
        trainer = trainer_factory(config)
        before = params_checksum(trainer.agent.networks())

        trainer.run_online(2)

        assert params_checksum(trainer.agent.networks()) == before
        assert trainer.buffer.stats["online_episodes"] == 2

    def test_bc_online_updates(self, trainer_factory, tiny_experiment_config):
        trainer = trainer_factory(tiny_experiment_config.with_overrides(["agent.algorithm=bc",
                                                                          "agent.alpha=0", "agent.beta=0"]))

        trainer.run_online(1)

        row = read_metrics(trainer.metrics.path)[0]
        assert row["loss_bc"] is not None
        assert row["loss_td"] is None

    def test_same_seed_same_rows(self, trainer_factory):
        a = trainer_factory(subdir="a")
        b = trainer_factory(subdir="b")

        a.run_online(2)
        b.run_online(2)

        with open(a.metrics.path) as fa, open(b.metrics.path) as fb:
            assert fa.read() == fb.read()


class TestEvaluation:
    """Testes da avaliação determinística."""

    def test_demonstrator_succeeds(self):
        env = make_env("reacher")

        result = evaluate_policy(env, ReacherDemonstrator(), attempts=5, seed=0)

        assert result.success_rate == 1.0
        assert result.attempts == 5
        assert len(result.outcomes) == 5

    def test_deterministic_for_seed(self):
        env = make_env("grasp", horizon=20)
        policy = RandomPolicy(env.act_dim, env.action_low, env.action_high)

        a = evaluate_policy(env, policy, 3, seed=4, deterministic=False)
        b = evaluate_policy(env, policy, 3, seed=4, deterministic=False)

        assert a.outcomes == b.outcomes

    def test_attempts_must_be_positive(self):
        with pytest.raises(ConfigurationError):
            evaluate_policy(make_env("reacher"), ReacherDemonstrator(), 0, seed=0)

    def test_record_continues_eval_indices(self, tmp_path):
        metrics = MetricsWriter(str(tmp_path / "metrics.csv"))
        result = evaluate_policy(make_env("reacher", horizon=10), ReacherDemonstrator(), 2, seed=0)

        record_evaluation(metrics, result, updates=10)
        record_evaluation(metrics, result, updates=20)

        rows = read_metrics(metrics.path)
        assert [r["index"] for r in rows] == [0, 1, 2, 3]
        assert [r["updates"] for r in rows] == [10, 10, 20, 20]


class TestCheckpoint:

    def test_save_and_restore(self, tmp_path, trainer_factory):
        trainer = trainer_factory()
        trainer.run_offline(2, metrics_every=1)
        path = str(tmp_path / "offline.json")

        trainer.save(path, "offline")
        document = restore_agent(path)

        assert document["phase"] == "offline"
        assert document["offline_steps_done"] == 2
        assert params_checksum(document["agent"].networks()) == params_checksum(trainer.agent.networks())

    def test_restore_without_agent(self, tmp_path):
        from core.checkpoint import save_checkpoint

        path = str(tmp_path / "bad.json")
        save_checkpoint(path, {"phase": "offline"})

        with pytest.raises(ConfigurationError):
            restore_agent(path)

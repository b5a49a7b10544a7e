"""
Testes Unitários para o DualBuffer
Composição exata dos batches, auto-imitação idempotente e persistência.
"""

import numpy as np
import pytest

from core.errors import BufferEmptyError, ConfigurationError
from replay.dual_buffer import MANIFEST_NAME, DualBuffer
from replay.transitions import SOURCE_OFFLINE, SOURCE_ONLINE


@pytest.fixture
def buffer(trajectory_factory):
    buf = DualBuffer(3, 0.9, rng=np.random.default_rng(0))
    buf.add_offline([trajectory_factory(10, seed=s) for s in range(3)])
    return buf


class TestSampling:
    """Testes da amostragem simétrica."""

    def test_offline_only_before_online(self, buffer):
        batch = buffer.sample_symmetric(64)

        assert len(batch) == 64
        assert np.all(batch.source == SOURCE_OFFLINE)

    def test_exact_half_split(self, buffer, trajectory_factory):
        buffer.add_online_episode(trajectory_factory(4, seed=9))

        batch = buffer.sample_symmetric(512)

        assert np.sum(batch.source == SOURCE_OFFLINE) == 256
        assert np.sum(batch.source == SOURCE_ONLINE) == 256

    def test_union_when_symmetric_disabled(self, trajectory_factory):
        buf = DualBuffer(3, 0.9, rng=np.random.default_rng(0), symmetric_sampling=False)
        buf.add_offline([trajectory_factory(30, seed=1)])
        buf.add_online_episode(trajectory_factory(2, seed=2))

        batch = buf.sample_symmetric(400)

        # 2 de 32 transições são online
        assert np.sum(batch.source == SOURCE_ONLINE) < 100

    def test_odd_batch_rejected(self, buffer):
        with pytest.raises(ConfigurationError):
            buffer.sample_symmetric(7)

    def test_empty_buffers(self):
        with pytest.raises(BufferEmptyError):
            DualBuffer(3, 0.9).sample_symmetric(8)

    def test_sample_states_shape(self, buffer):
        assert buffer.sample_states(6).shape == (6, 3)

    def test_same_rng_same_batches(self, trajectory_factory):
        def build():
            buf = DualBuffer(3, 0.9, rng=np.random.default_rng(5))
            buf.add_offline([trajectory_factory(10, seed=1)])
            return buf

        np.testing.assert_array_equal(build().sample_symmetric(8).s, build().sample_symmetric(8).s)


class TestSelfImitation:
    """Testes do commit de auto-imitação."""

    def test_successful_episode_copied_once(self, buffer, trajectory_factory):
        episode = trajectory_factory(5, seed=4, reward_scale=1.0)
        episode.rewards[:] = 1.0
        buffer.add_online_episode(episode)

        assert buffer.sil_commit(episode)
        assert not buffer.sil_commit(episode)
        assert len(buffer.d_off) == 4
        assert len(buffer.d_on) == 1
        assert buffer.offline_origins[-1] == "sil"

    def test_zero_return_not_copied(self, buffer, trajectory_factory):
        episode = trajectory_factory(5, seed=4, reward_scale=0.0)
        buffer.add_online_episode(episode)

        assert not buffer.sil_commit(episode)
        assert len(buffer.d_off) == 3
        assert buffer.stats["sil_rejections"] == 1

    def test_disabled(self, trajectory_factory):
        buf = DualBuffer(3, 0.9, self_imitation=False)
        episode = trajectory_factory(5, seed=4)
        episode.rewards[:] = 1.0
        buf.add_online_episode(episode)

        assert not buf.sil_commit(episode)
        assert len(buf.d_off) == 0


class TestPersistence:

    def test_save_and_load(self, tmp_path, buffer, trajectory_factory):
        episode = trajectory_factory(5, seed=4)
        episode.rewards[:] = 1.0
        buffer.add_online_episode(episode)
        buffer.sil_commit(episode)
        directory = str(tmp_path / "buffers")

        buffer.save(directory)
        restored = DualBuffer.load(directory, rng=np.random.default_rng(0))

        assert (tmp_path / "buffers" / MANIFEST_NAME).exists()
        assert len(restored.d_off) == 4
        assert len(restored.d_on) == 1
        assert restored.offline_origins == ["demo", "demo", "demo", "sil"]
        assert restored.stats["sil_commits"] == 1
        assert not restored.sil_commit(restored.d_on.trajectories[0])
        assert restored.d_off.num_transitions() == buffer.d_off.num_transitions()

"""
Pytest Configuration and Shared Fixtures
Configuração global do pytest e fixtures compartilhadas entre todos os testes.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from agents.networks import Critic, Policy  # noqa: E402
from config.config_completa import AgentConfig, EnvConfig, ExperimentConfig  # noqa: E402
from envs.dataset import Trajectory  # noqa: E402
from replay.transitions import TransitionBatch, assemble_nstep_batch  # noqa: E402


# ============================================================================
# FIXTURES: Geradores e redes pequenas
# ============================================================================

@pytest.fixture
def rng() -> np.random.Generator:
    """Gerador com semente fixa."""
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_critic() -> Critic:
    """Crítico 3+2 -> 8 -> 8 -> 1."""
    return Critic(obs_dim=3, act_dim=2, hidden=8, depth=2, rng=np.random.default_rng(0))


@pytest.fixture
def tiny_policy() -> Policy:
    return Policy(obs_dim=3, act_dim=2, hidden=8, depth=2, rng=np.random.default_rng(1))


# ============================================================================
# FIXTURES: Trajetórias e batches
# ============================================================================

def make_trajectory(length: int, obs_dim: int = 3, act_dim: int = 2, seed: int = 0,
                    fault: bool = False, reward_scale: float = 1.0) -> Trajectory:
    """Trajetória sintética com recompensas em {0, 1}."""
    gen = np.random.default_rng(seed)
    return Trajectory(
        observations=gen.normal(size=(length + 1, obs_dim)),
        actions=gen.uniform(-1.0, 1.0, size=(length, act_dim)),
        rewards=reward_scale * gen.integers(0, 2, size=length).astype(np.float64),
        fault=fault,
        success=False,
    )


@pytest.fixture
def trajectory_factory():
    return make_trajectory


@pytest.fixture
def short_trajectory() -> Trajectory:
    return make_trajectory(7, seed=3)


@pytest.fixture
def small_batch() -> TransitionBatch:
    """16 transições de 3 passos, com uma trajetória terminada em fault."""
    pieces = [
        assemble_nstep_batch(make_trajectory(9, seed=5), 3, 0.9),
        assemble_nstep_batch(make_trajectory(7, seed=6, fault=True), 3, 0.9),
    ]
    return TransitionBatch.concatenate(pieces)


# ============================================================================
# FIXTURES: Configurações
# ============================================================================

@pytest.fixture
def tiny_agent_config() -> AgentConfig:
    return AgentConfig(algorithm="simplified_q", batch_size=8, critic_hidden=8, policy_hidden=8,
                       updates_per_episode=2, lr=1e-3)


@pytest.fixture
def tiny_experiment_config() -> ExperimentConfig:
    """Protocolo de segundos: reacher curto, redes pequenas, poucos passos."""
    return ExperimentConfig(
        env=EnvConfig(name="reacher", horizon=10),
        agent=AgentConfig(algorithm="simplified_q", batch_size=8, critic_hidden=8, policy_hidden=8,
                          updates_per_episode=2, lr=1e-3),
        demonstrations=3,
        offline_steps=6,
        online_episodes=3,
        eval_attempts=2,
        seeds=[0],
        diagnostics_every=2,
        offline_diagnostics_every=3,
        offline_metrics_every=2,
        probe_pairs=16,
        probe_episodes=2,
        bootstrap_resamples=50,
    )


# ============================================================================
# MARKERS: Configurações de Markers
# ============================================================================

def pytest_collection_modifyitems(config, items):
    """Modifica items coletados para adicionar markers automaticamente."""
    for item in items:
        # Adiciona marker 'unit' para testes em tests/unit/
        if "unit" in str(item.fspath):
            item.add_marker(pytest.mark.unit)

        # Adiciona marker 'integration' para testes em tests/integration/
        elif "integration" in str(item.fspath):
            item.add_marker(pytest.mark.integration)

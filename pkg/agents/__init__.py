"""
Agents Package - Críticos, política, perdas e o agente ator-crítico
"""

from .agent import ALGORITHM_REGISTRY, ActorReport, Agent, AlgorithmSpec, LossReport, target_sync
from .losses import cql_penalty, dr3_reg_loss, ntk_kernel_estimate, ntk_reg_loss, td_targets
from .networks import Critic, CriticOutput, Policy, critic_forward, policy_sample

__all__ = [
    'ALGORITHM_REGISTRY', 'ActorReport', 'Agent', 'AlgorithmSpec', 'LossReport', 'target_sync',
    'cql_penalty', 'dr3_reg_loss', 'ntk_kernel_estimate', 'ntk_reg_loss', 'td_targets',
    'Critic', 'CriticOutput', 'Policy', 'critic_forward', 'policy_sample',
]

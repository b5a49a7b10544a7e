"""
Envs Package - Ambientes de controle contínuo, demonstradores e datasets
"""

from core.registry import Registry

from .dataset import Trajectory, collect_demonstrations, load_dataset, rollout, save_dataset
from .demonstrators import GraspDemonstrator, RandomPolicy, ReacherDemonstrator, demonstrator_for
from .grasp import GraspEnv
from .reacher import ReacherEnv

ENVS = Registry("ambiente")
ENVS.register("reacher", lambda **kw: ReacherEnv(observation="state", **kw))
ENVS.register("reacher_image", lambda **kw: ReacherEnv(observation="image", **kw))
ENVS.register("grasp", lambda **kw: GraspEnv(**kw))


def make_env(name: str, **params):
    """Cria o ambiente registrado como `name`."""
    return ENVS.resolve(name, **params)


__all__ = [
    'ENVS', 'make_env', 'GraspEnv', 'ReacherEnv', 'Trajectory', 'collect_demonstrations',
    'load_dataset', 'rollout', 'save_dataset', 'GraspDemonstrator', 'RandomPolicy',
    'ReacherDemonstrator', 'demonstrator_for',
]

"""
Config Package - Configuração de agentes, ambientes e experimentos
"""

from .config_completa import (
    ALGORITHMS,
    AgentConfig,
    EnvConfig,
    ExperimentConfig,
    apply_overrides,
    experiment_config_from_dict,
    load_experiment_config,
)

__version__ = "0.1.0"

__all__ = ['ALGORITHMS', 'AgentConfig', 'EnvConfig', 'ExperimentConfig', 'apply_overrides',
           'experiment_config_from_dict', 'load_experiment_config', '__version__']

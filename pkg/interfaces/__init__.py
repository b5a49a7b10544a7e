"""
Interfaces Package - Contratos abstratos entre ambientes, agentes e diagnósticos
"""

from .rl_interfaces import IActionSource, IEnvironment, IQFunction

__all__ = ['IActionSource', 'IEnvironment', 'IQFunction']

"""
Core Package - Núcleo numérico do sistema
Diferenciação reversa, otimizadores, verificação de gradientes e checkpoints
"""

from .autodiff import LayerSpec, MlpParams, Tape, TapeGradients, backward, build_layers, forward, init_mlp
from .optim import AdamState, adam_step, sgd_step
from .gradcheck import gradient_check
from .registry import Registry

__all__ = [
    'LayerSpec', 'MlpParams', 'Tape', 'TapeGradients', 'backward', 'build_layers', 'forward', 'init_mlp',
    'AdamState', 'adam_step', 'sgd_step', 'gradient_check', 'Registry',
]

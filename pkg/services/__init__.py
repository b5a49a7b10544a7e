"""
Services Package - Execução do protocolo
Contexto da execução, logging por execução, métricas, treinador e comandos
"""

from .metrics import METRICS_HEADER, MetricsRow, MetricsWriter, read_metrics
from .run_context import RunContext
from .run_logger import RunLogger
from .trainer import EvalResult, Trainer, TrainingRngs, evaluate_policy

__all__ = [
    'METRICS_HEADER', 'MetricsRow', 'MetricsWriter', 'read_metrics', 'RunContext', 'RunLogger',
    'EvalResult', 'Trainer', 'TrainingRngs', 'evaluate_policy',
]

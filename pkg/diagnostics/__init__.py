"""
Diagnostics Package - Instrumentos de análise do treino
Similaridade de features, rastreio de Q, histogramas de ação, campo de
gradiente de Q e estatísticas entre seeds
"""

from .feature_diagnostics import (
    ProbeSet, QTrace, SimilarityReport, build_probe_set, feature_similarity, q_trace,
)
from .policy_diagnostics import ActionHistogram, GradientField, action_histogram, q_action_gradient_field
from .run_statistics import RunStatistics, interquartile_mean, run_statistics, windowed_rate
from .training_diagnostics import TrainingDiagnostics

__all__ = [
    'ProbeSet', 'QTrace', 'SimilarityReport', 'build_probe_set', 'feature_similarity', 'q_trace',
    'ActionHistogram', 'GradientField', 'action_histogram', 'q_action_gradient_field',
    'RunStatistics', 'interquartile_mean', 'run_statistics', 'windowed_rate', 'TrainingDiagnostics',
]

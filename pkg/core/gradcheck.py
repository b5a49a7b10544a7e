"""
Verificação de gradientes por diferenças centrais.
"""

from typing import Callable, Optional, Tuple

import numpy as np

from core.autodiff import MlpParams, TapeGradients

DEFAULT_MAX_ENTRIES = 2000
RELATIVE_FLOOR = 1e-6


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = RELATIVE_FLOOR) -> float:
    """max |a − n| / max(|a| + |n|, floor), elemento a elemento."""
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    if analytic.size == 0:
        return 0.0
    denom = np.maximum(np.abs(analytic) + np.abs(numeric), floor)
    return float(np.max(np.abs(analytic - numeric) / denom))


def finite_difference(fun: Callable[[np.ndarray], float], x: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    """Gradiente central de uma função escalar de um array (cópia de x é perturbada)."""
    x = np.array(x, dtype=np.float64)
    grad = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        original = x[idx]
        x[idx] = original + eps
        plus = fun(x)
        x[idx] = original - eps
        minus = fun(x)
        x[idx] = original
        grad[idx] = (plus - minus) / (2.0 * eps)
    return grad


def gradient_check(f: Callable[[MlpParams], Tuple[float, TapeGradients]], params: MlpParams,
                   eps: float = 1e-5, max_entries: int = DEFAULT_MAX_ENTRIES,
                   rng: Optional[np.random.Generator] = None) -> float:
    """
    Compara o gradiente analítico de f com diferenças centrais.

    Args:
        f: Função determinística params -> (valor escalar, gradientes analíticos)
        params: Ponto de avaliação (restaurado ao final)
        eps: Passo das diferenças centrais
        max_entries: Acima deste número de parâmetros, uma subamostra aleatória
        rng: Gerador da subamostra (semente 0 se omitido)

    Returns:
        Maior erro relativo encontrado
    """
    if eps <= 0:
        raise ValueError(f"eps deve ser > 0, recebido {eps}")
    _, analytic = f(params)
    entries = [(name, idx) for name in params.names() for idx in range(params.tensors[name].size)]
    if len(entries) > max_entries:
        rng = rng or np.random.default_rng(0)
        chosen = rng.choice(len(entries), size=max_entries, replace=False)
        entries = [entries[i] for i in sorted(chosen)]

    worst = 0.0
    for name, idx in entries:
        flat = params.tensors[name].flat
        original = flat[idx]
        flat[idx] = original + eps
        params.mark_modified()
        plus, _ = f(params)
        flat[idx] = original - eps
        params.mark_modified()
        minus, _ = f(params)
        flat[idx] = original
        params.mark_modified()
        numeric = (plus - minus) / (2.0 * eps)
        worst = max(worst, relative_error(analytic.tensors[name].reshape(-1)[idx], numeric))
    return worst

"""
Run Statistics - Taxas por janela, IQM e intervalos bootstrap
=============================================================
Por seed: taxa de sucesso e de fault em janelas consecutivas de episódios
(padrão 10). Entre seeds: média interquartil (IQM) por ponto da curva e
intervalo de confiança de 95% pelo bootstrap de percentis, reamostrando
seeds com reposição (2000 reamostragens).

IQM: descarta int(0.25·n) valores em cada extremo da amostra ordenada.
"""

import csv
import logging
import os
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from core.errors import ConfigurationError

DEFAULT_WINDOW = 10
DEFAULT_RESAMPLES = 2000
CONFIDENCE = 0.95

logger = logging.getLogger(__name__)


def windowed_rate(flags: Sequence[bool], window: int = DEFAULT_WINDOW) -> np.ndarray:
    """Média de cada bloco consecutivo de `window` episódios (o último pode ser parcial)."""
    if window < 1:
        raise ConfigurationError(f"Janela deve ser >= 1, recebido {window}")
    values = np.asarray(flags, dtype=np.float64)
    return np.array([values[i:i + window].mean() for i in range(0, len(values), window)])


def interquartile_mean(values: np.ndarray, axis: int = 0) -> np.ndarray:
    """IQM ao longo de `axis`."""
    data = np.sort(np.asarray(values, dtype=np.float64), axis=axis)
    n = data.shape[axis]
    cut = int(0.25 * n)
    kept = np.take(data, np.arange(cut, n - cut), axis=axis)
    return kept.mean(axis=axis)


def stratified_bootstrap_ci(per_seed: np.ndarray, rng: np.random.Generator,
                            resamples: int = DEFAULT_RESAMPLES,
                            confidence: float = CONFIDENCE) -> Tuple[np.ndarray, np.ndarray]:
    """
    Intervalo de percentis do IQM, reamostrando linhas (seeds) de per_seed [S×P].

    Returns:
        (limite inferior [P], limite superior [P])
    """
    per_seed = np.atleast_2d(np.asarray(per_seed, dtype=np.float64))
    S = per_seed.shape[0]
    picks = rng.integers(0, S, size=(resamples, S))
    estimates = np.stack([interquartile_mean(per_seed[p], axis=0) for p in picks])
    tail = (1.0 - confidence) / 2.0 * 100.0
    return np.percentile(estimates, tail, axis=0), np.percentile(estimates, 100.0 - tail, axis=0)


@dataclass
class CurveStatistics:
    """Curva por seed, IQM entre seeds e IC (None com menos de 2 seeds)."""
    per_seed: np.ndarray
    iqm: np.ndarray
    ci_low: Optional[np.ndarray]
    ci_high: Optional[np.ndarray]


@dataclass
class RunStatistics:
    window: int
    seeds: List[int]
    success: CurveStatistics
    fault: CurveStatistics
    final_success: Dict[int, float]

    @property
    def points(self) -> int:
        return int(self.success.iqm.shape[0])

    def to_csv(self, path: str):
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["point", "episode_end", "success_iqm", "success_low", "success_high",
                             "fault_iqm", "fault_low", "fault_high"])
            for i in range(self.points):
                row = [i, (i + 1) * self.window]
                for curve in (self.success, self.fault):
                    row.append(repr(float(curve.iqm[i])))
                    row.extend(["", ""] if curve.ci_low is None else
                               [repr(float(curve.ci_low[i])), repr(float(curve.ci_high[i]))])
                writer.writerow(row)


def _curve(per_seed: np.ndarray, rng: np.random.Generator, resamples: int) -> CurveStatistics:
    iqm = interquartile_mean(per_seed, axis=0)
    if per_seed.shape[0] < 2:
        return CurveStatistics(per_seed, iqm, None, None)
    low, high = stratified_bootstrap_ci(per_seed, rng, resamples)
    return CurveStatistics(per_seed, iqm, low, high)


def run_statistics(records: Sequence[Mapping], window: int = DEFAULT_WINDOW,
                   resamples: int = DEFAULT_RESAMPLES, seed: int = 0, final_episodes: int = 50,
                   log: Optional[logging.Logger] = None) -> RunStatistics:
    """
    Estatísticas de uma família de execuções.

    Args:
        records: Dicionários com seed, episode, success e fault
        window: Episódios por ponto da curva
        resamples: Reamostragens do bootstrap
        seed: Semente do bootstrap
        final_episodes: Tamanho da janela final usada em final_success

    Raises:
        ConfigurationError: Nenhum registro, ou seeds com números de episódios diferentes
    """
    log = log or logger
    if not records:
        raise ConfigurationError("run_statistics sem registros")
    by_seed: Dict[int, List[Mapping]] = {}
    for record in records:
        by_seed.setdefault(int(record["seed"]), []).append(record)
    seeds = sorted(by_seed)
    lengths = {len(v) for v in by_seed.values()}
    if len(lengths) != 1:
        raise ConfigurationError(f"Seeds com números de episódios diferentes: {sorted(lengths)}")

    success_rows, fault_rows, final = [], [], {}
    for s in seeds:
        episodes = sorted(by_seed[s], key=lambda r: int(r["episode"]))
        success = [bool(r["success"]) for r in episodes]
        success_rows.append(windowed_rate(success, window))
        fault_rows.append(windowed_rate([bool(r["fault"]) for r in episodes], window))
        final[s] = float(np.mean(success[-final_episodes:]))

    if len(seeds) < 2:
        log.warning(f"[DIAG] Apenas {len(seeds)} seed: IQM pontual, intervalo de confiança omitido")
    rng = np.random.default_rng(seed)
    return RunStatistics(
        window=window,
        seeds=seeds,
        success=_curve(np.array(success_rows), rng, resamples),
        fault=_curve(np.array(fault_rows), rng, resamples),
        final_success=final,
    )

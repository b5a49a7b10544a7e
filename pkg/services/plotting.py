"""
Plotting - SVGs a partir dos CSVs da execução
=============================================
Apenas apresentação: todos os números vivem nos CSVs. O tipo de figura é
escolhido pelo cabeçalho do arquivo:

    metrics.csv           curva de sucesso (janela) com faixa IQM entre seeds
    similarity.csv        mapa de calor saturado no corte
    q_trace*.csv          Q médio/máximo por checkpoint e o limite 1/(1−γ)
    action_histogram.csv  barras por dimensão de ação
    gradient_field.csv    contorno de Q e setas de ∂Q/∂a
    run_statistics.csv    curvas IQM com intervalo bootstrap
"""

import csv
import logging
import os
from typing import Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from core.errors import CsvParseError, EmptyPlotError  # noqa: E402
from diagnostics.feature_diagnostics import DEFAULT_CLIP  # noqa: E402
from diagnostics.run_statistics import run_statistics  # noqa: E402
from services.metrics import METRICS_HEADER, read_metrics, read_numeric_csv  # noqa: E402

logger = logging.getLogger(__name__)

# SVG reprodutível: sem data e com ids estáveis
plt.rcParams["svg.hashsalt"] = "simplified-q"
SVG_METADATA = {"Date": None}

Q_TRACE_HEADER = ["phase", "step", "probe", "q", "bound"]
HISTOGRAM_HEADER = ["label", "dim", "bin", "left", "right", "frequency"]
RUN_STATS_HEADER = ["point", "episode_end", "success_iqm", "success_low", "success_high",
                    "fault_iqm", "fault_low", "fault_high"]


def _header(path: str) -> List[str]:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh), None)
    if not header:
        raise EmptyPlotError(path)
    return header


def _save(fig, path: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig.savefig(path, format="svg", metadata=SVG_METADATA)
    plt.close(fig)
    logger.info(f"[PLOT] {path}")
    return path


def _rows(path: str) -> List[Dict]:
    rows = read_numeric_csv(path)
    if not rows:
        raise EmptyPlotError(path)
    return rows


# ========== CURVAS DE SUCESSO ==========

def plot_success_curves(metrics_paths: Sequence[str], out_path: str, window: int = 10,
                        resamples: int = 2000) -> str:
    """
    Taxa de sucesso por janela dos episódios online; um arquivo por seed.

    Com duas ou mais seeds desenha a faixa do intervalo bootstrap.
    """
    records = []
    for seed, path in enumerate(metrics_paths):
        rows = [r for r in read_metrics(path) if r["phase"] == "online"]
        records.extend({"seed": seed, "episode": r["index"], "success": bool(r["success"]),
                        "fault": bool(r["fault"])} for r in rows)
    if not records:
        raise EmptyPlotError(", ".join(metrics_paths))

    stats = run_statistics(records, window, resamples, log=logger)
    x = (np.arange(stats.points) + 1) * window
    fig, ax = plt.subplots(figsize=(6, 4))
    for row in stats.success.per_seed:
        ax.plot(x, row, color="tab:gray", alpha=0.35, linewidth=0.8)
    ax.plot(x, stats.success.iqm, color="tab:blue", label="IQM")
    if stats.success.ci_low is not None:
        ax.fill_between(x, stats.success.ci_low, stats.success.ci_high, color="tab:blue", alpha=0.2,
                        label="IC 95%")
    ax.set_xlabel("episódio online")
    ax.set_ylabel(f"taxa de sucesso (janela {window})")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="lower right")
    return _save(fig, out_path)


# ========== DIAGNÓSTICOS ==========

def plot_similarity(path: str, out_path: str, clip: float = DEFAULT_CLIP) -> str:
    rows = _rows(path)
    matrix = np.array([[row[k] for k in row] for row in rows], dtype=np.float64)
    fig, ax = plt.subplots(figsize=(5, 4.5))
    image = ax.imshow(matrix, cmap="viridis", vmin=min(0.0, float(matrix.min())), vmax=clip,
                      interpolation="nearest")
    fig.colorbar(image, ax=ax, label="min(Φᵢ·Φⱼ, corte)")
    ax.set_title(f"similaridade de features ({len(matrix)} pares)")
    ax.set_xticks([])
    ax.set_yticks([])
    return _save(fig, out_path)


def plot_q_trace(path: str, out_path: str) -> str:
    rows = _rows(path)
    steps = sorted({(r["phase"], r["step"]) for r in rows}, key=lambda p: (str(p[0]), p[1]))
    means, maxima, bounds = [], [], []
    for phase, step in steps:
        values = [r["q"] for r in rows if r["phase"] == phase and r["step"] == step]
        means.append(float(np.mean(values)))
        maxima.append(float(np.max(values)))
        bounds.append(next(r["bound"] for r in rows if r["phase"] == phase and r["step"] == step))
    x = np.arange(len(steps))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(x, means, marker="o", label="Q médio")
    ax.plot(x, maxima, marker="^", label="Q máximo")
    ax.plot(x, bounds, linestyle="--", color="tab:red", label="1/(1−γ)")
    ax.set_xticks(x)
    ax.set_xticklabels([f"{phase}\n{int(step)}" for phase, step in steps], fontsize=7)
    ax.set_ylabel("Q nos pares de prova")
    ax.legend()
    return _save(fig, out_path)


def plot_action_histogram(path: str, out_path: str) -> str:
    rows = _rows(path)
    dims = sorted({int(r["dim"]) for r in rows})
    fig, axes = plt.subplots(1, len(dims), figsize=(3.2 * len(dims), 3), squeeze=False)
    for ax, dim in zip(axes[0], dims):
        bins = [r for r in rows if int(r["dim"]) == dim]
        left = np.array([r["left"] for r in bins])
        width = np.array([r["right"] for r in bins]) - left
        ax.bar(left, [r["frequency"] for r in bins], width=width, align="edge", edgecolor="black",
               linewidth=0.3)
        ax.set_title(f"dimensão {dim}")
        ax.set_xlabel("ação")
    axes[0][0].set_ylabel("frequência")
    return _save(fig, out_path)


def plot_gradient_field(path: str, out_path: str) -> str:
    rows = _rows(path)
    keys = list(rows[0])
    xs = np.unique([r[keys[0]] for r in rows])
    ys = np.unique([r[keys[1]] for r in rows])
    q = np.array([r["q"] for r in rows]).reshape(len(ys), len(xs))
    gx = np.array([r["dq_dx"] for r in rows]).reshape(len(ys), len(xs))
    gy = np.array([r["dq_dy"] for r in rows]).reshape(len(ys), len(xs))
    fig, ax = plt.subplots(figsize=(5, 4.5))
    contour = ax.contourf(xs, ys, q, levels=20, cmap="viridis")
    fig.colorbar(contour, ax=ax, label="Q")
    ax.quiver(xs, ys, gx, gy, color="white")
    ax.set_xlabel(keys[0])
    ax.set_ylabel(keys[1])
    ax.set_title("∂Q/∂a")
    return _save(fig, out_path)


def plot_run_statistics(path: str, out_path: str) -> str:
    rows = _rows(path)
    x = [r["episode_end"] for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, color in (("success", "tab:blue"), ("fault", "tab:red")):
        ax.plot(x, [r[f"{name}_iqm"] for r in rows], color=color, label=name)
        if rows[0][f"{name}_low"] is not None:
            ax.fill_between(x, [r[f"{name}_low"] for r in rows], [r[f"{name}_high"] for r in rows],
                            color=color, alpha=0.2)
    ax.set_xlabel("episódio online")
    ax.set_ylabel("taxa (IQM entre seeds)")
    ax.set_ylim(-0.02, 1.02)
    ax.legend()
    return _save(fig, out_path)


# ========== DESPACHO ==========

def figure_kind(path: str) -> str:
    """
    Raises:
        CsvParseError: cabeçalho não reconhecido
        EmptyPlotError: arquivo vazio
    """
    header = _header(path)
    if header == METRICS_HEADER:
        return "metrics"
    if header == Q_TRACE_HEADER:
        return "q_trace"
    if header == HISTOGRAM_HEADER:
        return "action_histogram"
    if header == RUN_STATS_HEADER:
        return "run_statistics"
    if header[2:] == ["q", "dq_dx", "dq_dy"]:
        return "gradient_field"
    if header == [f"j{j}" for j in range(len(header))]:
        return "similarity"
    raise CsvParseError(path, 1, f"cabeçalho não reconhecido: {header[:6]}")


_PLOTTERS = {
    "similarity": plot_similarity,
    "q_trace": plot_q_trace,
    "action_histogram": plot_action_histogram,
    "gradient_field": plot_gradient_field,
    "run_statistics": plot_run_statistics,
}


def plot_files(paths: Sequence[str], out_dir: str, window: int = 10, resamples: int = 2000,
               clip: Optional[float] = None) -> List[str]:
    """
    Um SVG por família de figura. Todos os CSVs de métricas entram numa
    única curva (cada arquivo é uma seed).
    """
    written: List[str] = []
    metrics = []
    for path in paths:
        kind = figure_kind(path)
        if kind == "metrics":
            metrics.append(path)
            continue
        stem = os.path.splitext(os.path.basename(path))[0]
        out_path = os.path.join(out_dir, f"{stem}.svg")
        if kind == "similarity" and clip is not None:
            written.append(plot_similarity(path, out_path, clip))
        else:
            written.append(_PLOTTERS[kind](path, out_path))
    if metrics:
        written.append(plot_success_curves(metrics, os.path.join(out_dir, "success_curve.svg"), window, resamples))
    return written

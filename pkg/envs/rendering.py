"""
Rendering - Rasterização da seta do reacher
===========================================
Imagem 16×16 em tons de cinza cuja seta parte do centro e aponta para o
alvo; comprimento e ângulo codificam x_goal − x_curr.

A imagem depende só do delta. Coordenadas são calculadas relativas à
âncora, então negar o delta produz exatamente a reflexão pontual do raster.
"""

import numpy as np

IMAGE_SIZE = 16
ANCHOR = IMAGE_SIZE / 2.0
MAX_DELTA_NORM = 2.0 * np.sqrt(2.0)
ARROW_SCALE = (ANCHOR - 1.0) / MAX_DELTA_NORM
LINE_WIDTH = 1.0
DOT_RADIUS = 1.0
HEAD_LENGTH = 2.5
HEAD_ANGLE = np.deg2rad(150.0)

# Centros dos pixels relativos à âncora: coluna -> x, linha -> −y
_CENTERS = np.arange(IMAGE_SIZE) + 0.5 - ANCHOR
_PX = np.broadcast_to(_CENTERS[None, :], (IMAGE_SIZE, IMAGE_SIZE))
_PY = np.broadcast_to(-_CENTERS[:, None], (IMAGE_SIZE, IMAGE_SIZE))


def _segment_intensity(start: np.ndarray, end: np.ndarray) -> np.ndarray:
    seg = end - start
    length_sq = float(seg @ seg)
    rx = _PX - start[0]
    ry = _PY - start[1]
    if length_sq == 0.0:
        dist = np.hypot(rx, ry)
    else:
        proj = np.clip((rx * seg[0] + ry * seg[1]) / length_sq, 0.0, 1.0)
        dist = np.hypot(rx - proj * seg[0], ry - proj * seg[1])
    return np.clip(1.0 - dist / LINE_WIDTH, 0.0, 1.0)


def render_arrow(delta: np.ndarray) -> np.ndarray:
    """
    Rasteriza a seta para um delta (x_goal − x_curr).

    Returns:
        Vetor [256] com valores em [0, 1]
    """
    delta = np.asarray(delta, dtype=np.float64)
    origin = np.zeros(2)
    image = np.clip(1.0 - np.hypot(_PX, _PY) / DOT_RADIUS, 0.0, 1.0)

    norm = float(np.hypot(delta[0], delta[1]))
    if norm > 0.0:
        tip = delta * ARROW_SCALE
        image = np.maximum(image, _segment_intensity(origin, tip))
        unit = delta / norm
        head = min(HEAD_LENGTH, 0.4 * norm * ARROW_SCALE)
        for angle in (HEAD_ANGLE, -HEAD_ANGLE):
            c, s = np.cos(angle), np.sin(angle)
            wing = np.array([c * unit[0] - s * unit[1], s * unit[0] + c * unit[1]]) * head
            image = np.maximum(image, _segment_intensity(tip, tip + wing))
    return image.reshape(-1)

"""
Metrics - Linhas de métricas em CSV, apenas acréscimo
=====================================================
Cabeçalho fixo (METRICS_HEADER); um arquivo por execução. Índices
monotônicos dentro de cada fase. Campos ausentes ficam vazios.

Floats são gravados com repr: duas execuções iguais produzem arquivos
byte a byte iguais (o tempo de parede só é gravado quando pedido).
"""

import csv
import os
from dataclasses import dataclass, fields
from typing import Any, Dict, List, Optional

import numpy as np

from core.errors import CsvParseError

PHASES = ("offline", "online", "eval")

METRICS_HEADER = [
    "phase", "index", "success", "fault", "return",
    "loss_td", "loss_cql", "loss_reg", "loss_actor", "loss_bc",
    "temperature", "entropy", "q_mean", "transitions", "updates", "wall_time",
]

_BOOL_COLUMNS = ("success", "fault")
_INT_COLUMNS = ("index", "transitions", "updates")


@dataclass
class MetricsRow:
    """Uma linha do CSV de métricas."""
    phase: str
    index: int
    success: Optional[bool] = None
    fault: Optional[bool] = None
    episode_return: Optional[float] = None
    loss_td: Optional[float] = None
    loss_cql: Optional[float] = None
    loss_reg: Optional[float] = None
    loss_actor: Optional[float] = None
    loss_bc: Optional[float] = None
    temperature: Optional[float] = None
    entropy: Optional[float] = None
    q_mean: Optional[float] = None
    transitions: Optional[int] = None
    updates: Optional[int] = None
    wall_time: Optional[float] = None

    def __post_init__(self):
        if self.phase not in PHASES:
            raise ValueError(f"Fase desconhecida: {self.phase}")

    def to_cells(self) -> List[str]:
        cells = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                cells.append("")
            elif isinstance(value, (bool, np.bool_)):
                cells.append("1" if value else "0")
            elif isinstance(value, (float, np.floating)):
                cells.append(repr(float(value)))
            else:
                cells.append(str(int(value)))
        return cells


class MetricsWriter:
    """
    Escritor apenas-acréscimo.

    Reabrir um arquivo existente verifica o cabeçalho e continua os índices.
    """

    def __init__(self, path: str):
        self.path = path
        self._last_index: Dict[str, int] = {}
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        if os.path.exists(path) and os.path.getsize(path) > 0:
            for row in read_metrics(path):
                self._last_index[row["phase"]] = row["index"]
        else:
            with open(path, "w", newline="", encoding="utf-8") as fh:
                csv.writer(fh).writerow(METRICS_HEADER)

    def append(self, row: MetricsRow):
        """
        Raises:
            ValueError: índice não crescente dentro da fase
        """
        last = self._last_index.get(row.phase)
        if last is not None and row.index <= last:
            raise ValueError(f"Índice {row.index} não é maior que {last} na fase {row.phase}")
        with open(self.path, "a", newline="", encoding="utf-8") as fh:
            csv.writer(fh).writerow(row.to_cells())
        self._last_index[row.phase] = row.index

    def last_index(self, phase: str) -> Optional[int]:
        return self._last_index.get(phase)


def _parse_cell(column: str, text: str) -> Any:
    if text == "":
        return None
    if column == "phase":
        if text not in PHASES:
            raise ValueError(f"fase desconhecida '{text}'")
        return text
    if column in _BOOL_COLUMNS:
        if text not in ("0", "1"):
            raise ValueError(f"booleano inválido '{text}' em {column}")
        return text == "1"
    if column in _INT_COLUMNS:
        return int(text)
    return float(text)


def read_metrics(path: str) -> List[Dict[str, Any]]:
    """
    Lê o CSV de métricas.

    Raises:
        CsvParseError: cabeçalho diferente, número de colunas errado ou valor inválido
    """
    rows: List[Dict[str, Any]] = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != METRICS_HEADER:
            raise CsvParseError(path, 1, f"cabeçalho inesperado: {header}")
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(METRICS_HEADER):
                raise CsvParseError(path, line, f"{len(row)} colunas, esperado {len(METRICS_HEADER)}")
            try:
                parsed = {col: _parse_cell(col, cell) for col, cell in zip(METRICS_HEADER, row)}
            except ValueError as exc:
                raise CsvParseError(path, line, str(exc)) from exc
            if parsed["phase"] is None or parsed["index"] is None:
                raise CsvParseError(path, line, "phase e index são obrigatórios")
            rows.append(parsed)
    return rows


def read_numeric_csv(path: str) -> List[Dict[str, Any]]:
    """
    Lê um CSV genérico de diagnóstico (números e rótulos).

    Raises:
        CsvParseError: linha com número de colunas diferente do cabeçalho
    """
    rows: List[Dict[str, Any]] = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise CsvParseError(path, 1, "arquivo vazio")
        for row in reader:
            if not row:
                continue
            if len(row) != len(header):
                raise CsvParseError(path, reader.line_num, f"{len(row)} colunas, esperado {len(header)}")
            parsed = {}
            for col, cell in zip(header, row):
                try:
                    parsed[col] = float(cell) if cell != "" else None
                except ValueError:
                    parsed[col] = cell
            rows.append(parsed)
    return rows

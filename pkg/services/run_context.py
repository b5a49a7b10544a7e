"""
Run Context - Diretório autodescritivo de uma execução
======================================================
<out>/<nome>/
    config.json            cópia da configuração efetiva
    manifest.json          versão do código, seed, comandos executados
    dataset.jsonl          demonstrações coletadas
    checkpoints/           offline.json, online.json
    buffers/               D_off e D_on ao fim da fase online
    metrics.csv            linhas offline/online/eval
    diagnostics/           CSVs de diagnóstico
    plots/                 SVGs
    logs/run.log
"""

import json
import logging
import os
import platform
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from config import __version__
from config.config_completa import ExperimentConfig, experiment_config_from_dict
from services.run_logger import RunLogger

CONFIG_FILE = "config.json"
MANIFEST_FILE = "manifest.json"


@dataclass
class RunContext:
    """Caminhos e logger de uma execução (config, seed)."""
    run_dir: str
    config: ExperimentConfig
    seed: int
    logger: logging.Logger = field(default_factory=lambda: logging.getLogger(__name__))
    run_logger: Optional[RunLogger] = None

    # ========== CAMINHOS ==========

    def path(self, *parts: str) -> str:
        return os.path.join(self.run_dir, *parts)

    @property
    def dataset_path(self) -> str:
        return self.path("dataset.jsonl")

    @property
    def metrics_path(self) -> str:
        return self.path("metrics.csv")

    @property
    def offline_checkpoint(self) -> str:
        return self.path("checkpoints", "offline.json")

    @property
    def online_checkpoint(self) -> str:
        return self.path("checkpoints", "online.json")

    @property
    def buffer_dir(self) -> str:
        return self.path("buffers")

    @property
    def diagnostics_dir(self) -> str:
        return self.path("diagnostics")

    @property
    def probe_path(self) -> str:
        return self.path("diagnostics", "probe_set.npz")

    # ========== CRIAÇÃO ==========

    @classmethod
    def create(cls, out_dir: str, config: ExperimentConfig, seed: int,
               console_level: int = logging.INFO) -> "RunContext":
        """Cria (ou reabre) o diretório e grava config + manifesto."""
        os.makedirs(out_dir, exist_ok=True)
        run_logger = RunLogger(out_dir, f"{os.path.basename(os.path.abspath(out_dir))}", console_level)
        context = cls(run_dir=out_dir, config=config, seed=seed, logger=run_logger.logger,
                      run_logger=run_logger)
        with open(context.path(CONFIG_FILE), "w", encoding="utf-8") as fh:
            json.dump(config.to_dict(), fh, indent=2, sort_keys=True)
        context._update_manifest()
        return context

    @classmethod
    def open(cls, run_dir: str, seed: Optional[int] = None,
             console_level: int = logging.INFO) -> "RunContext":
        """Reabre uma execução existente pela cópia da configuração."""
        with open(os.path.join(run_dir, CONFIG_FILE), "r", encoding="utf-8") as fh:
            config = experiment_config_from_dict(json.load(fh))
        manifest = read_manifest(run_dir)
        run_seed = seed if seed is not None else manifest.get("seed", config.seeds[0])
        return cls.create(run_dir, config, run_seed, console_level)

    def _update_manifest(self):
        manifest = read_manifest(self.run_dir)
        manifest.update({
            "code_version": __version__,
            "numpy_version": np.__version__,
            "python_version": platform.python_version(),
            "seed": self.seed,
            "env": self.config.env.name,
            "algorithm": self.config.agent.algorithm,
        })
        manifest.setdefault("commands", [])
        self._write_manifest(manifest)

    def record_command(self, command: str, details: Optional[Dict[str, Any]] = None):
        """Anexa o comando executado ao manifesto."""
        manifest = read_manifest(self.run_dir)
        manifest.setdefault("commands", []).append({"command": command, **(details or {})})
        self._write_manifest(manifest)

    def _write_manifest(self, manifest: Dict[str, Any]):
        with open(self.path(MANIFEST_FILE), "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)

    def close(self):
        if self.run_logger is not None:
            self.run_logger.close()


def read_manifest(run_dir: str) -> Dict[str, Any]:
    path = os.path.join(run_dir, MANIFEST_FILE)
    if not os.path.exists(path):
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)

"""
Checkpoint - Persistência em JSON
=================================
Documento versionado com formas das camadas, parâmetros, estado do Adam,
estatísticas de batch_norm e estado do gerador aleatório.

Floats são gravados com repr do Python, que faz ida e volta exata em
float64: retomar um checkpoint reproduz a execução bit a bit.
"""

import hashlib
import json
import logging
import os
from typing import Any, Dict, Iterable

import numpy as np

from core.autodiff import LayerSpec, MlpParams
from core.errors import ConfigurationError
from core.optim import AdamState

CHECKPOINT_FORMAT_VERSION = 1

logger = logging.getLogger(__name__)


def params_to_dict(params: MlpParams) -> Dict[str, Any]:
    return {
        "layers": [vars(spec).copy() for spec in params.layers],
        "tensors": {k: v.tolist() for k, v in params.tensors.items()},
        "running_mean": {str(k): v.tolist() for k, v in params.running_mean.items()},
        "running_var": {str(k): v.tolist() for k, v in params.running_var.items()},
    }


def params_from_dict(data: Dict[str, Any]) -> MlpParams:
    return MlpParams(
        [LayerSpec(**spec) for spec in data["layers"]],
        {k: np.array(v, dtype=np.float64) for k, v in data["tensors"].items()},
        {int(k): np.array(v, dtype=np.float64) for k, v in data.get("running_mean", {}).items()},
        {int(k): np.array(v, dtype=np.float64) for k, v in data.get("running_var", {}).items()},
    )


def adam_to_dict(state: AdamState) -> Dict[str, Any]:
    return {
        "lr": state.lr, "beta1": state.beta1, "beta2": state.beta2, "eps": state.eps,
        "step": state.step,
        "m": {k: np.asarray(v).tolist() for k, v in state.m.items()},
        "v": {k: np.asarray(v).tolist() for k, v in state.v.items()},
    }


def adam_from_dict(data: Dict[str, Any]) -> AdamState:
    return AdamState(
        lr=data["lr"], beta1=data["beta1"], beta2=data["beta2"], eps=data["eps"], step=data["step"],
        m={k: np.array(v, dtype=np.float64) for k, v in data["m"].items()},
        v={k: np.array(v, dtype=np.float64) for k, v in data["v"].items()},
    )


def rng_state(rng: np.random.Generator) -> Dict[str, Any]:
    return rng.bit_generator.state


def rng_from_state(state: Dict[str, Any]) -> np.random.Generator:
    bit_generator = getattr(np.random, state["bit_generator"])()
    bit_generator.state = state
    return np.random.Generator(bit_generator)


def save_checkpoint(path: str, payload: Dict[str, Any]):
    """Grava o documento (escrita atômica via arquivo temporário)."""
    document = {"format_version": CHECKPOINT_FORMAT_VERSION, **payload}
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(document, fh)
    os.replace(tmp, path)
    logger.info(f"[CHECKPOINT] Gravado: {path}")


def load_checkpoint(path: str) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as fh:
        document = json.load(fh)
    version = document.get("format_version")
    if version != CHECKPOINT_FORMAT_VERSION:
        raise ConfigurationError(f"Checkpoint {path}: formato {version} não suportado")
    return document


def params_checksum(networks: Iterable[MlpParams]) -> str:
    """SHA-256 dos tensores e estatísticas; muda com qualquer alteração de estado."""
    digest = hashlib.sha256()
    for params in networks:
        for name in params.names():
            digest.update(name.encode())
            digest.update(np.ascontiguousarray(params.tensors[name]).tobytes())
        for key in sorted(params.running_mean):
            digest.update(np.ascontiguousarray(params.running_mean[key]).tobytes())
            digest.update(np.ascontiguousarray(params.running_var[key]).tobytes())
    return digest.hexdigest()

"""
Autodiff - Diferenciação reversa para MLPs densos
=================================================
Núcleo numérico usado por todos os objetivos de treino:
- MlpParams: pesos, vieses, afins de normalização e estatísticas de batch_norm
- forward: avaliação com registro (tape) para o backward
- backward: gradientes exatos de (upstream · saída) em relação aos parâmetros
- TapeGradients: gradientes por tensor, congruentes com os parâmetros

Camada i:
    z = W x + b  ->  normalização opcional (batch_norm | layer_norm) com afim
    ->  ativação (tanh | relu | identity)

Tudo em float64.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import ConfigurationError, StaleTapeError

ACTIVATIONS = ("tanh", "relu", "identity")
NORMS = ("none", "batch_norm", "layer_norm")
MODES = ("train", "eval")

NORM_EPS = 1e-6
BN_MOMENTUM = 0.99

logger = logging.getLogger(__name__)


@dataclass
class LayerSpec:
    """Descrição de uma camada densa."""
    in_dim: int
    out_dim: int
    activation: str = "identity"
    norm: str = "none"
    bias: bool = True

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ConfigurationError(f"Ativação desconhecida: {self.activation}")
        if self.norm not in NORMS:
            raise ConfigurationError(f"Normalização desconhecida: {self.norm}")
        if self.in_dim < 1 or self.out_dim < 1:
            raise ConfigurationError(f"Dimensões inválidas: {self.in_dim}->{self.out_dim}")


class MlpParams:
    """
    Container de parâmetros de uma rede densa.

    Tensores nomeados por camada: W{i} [out×in], b{i} [out], g{i} e beta{i}
    (afim da normalização). Estatísticas de batch_norm ficam fora dos
    tensores diferenciáveis, em running_mean/running_var.

    O contador `version` é incrementado a cada mutação feita pelos
    otimizadores; tapes antigos são rejeitados pelo backward.
    """

    def __init__(self, layers: Sequence[LayerSpec], tensors: Dict[str, np.ndarray],
                 running_mean: Optional[Dict[int, np.ndarray]] = None,
                 running_var: Optional[Dict[int, np.ndarray]] = None):
        self.layers: List[LayerSpec] = list(layers)
        self.tensors: Dict[str, np.ndarray] = {k: np.asarray(v, dtype=np.float64) for k, v in tensors.items()}
        self.running_mean: Dict[int, np.ndarray] = dict(running_mean or {})
        self.running_var: Dict[int, np.ndarray] = dict(running_var or {})
        self.version = 0

        for i, spec in enumerate(self.layers):
            if spec.norm == "batch_norm":
                self.running_mean.setdefault(i, np.zeros(spec.out_dim))
                self.running_var.setdefault(i, np.ones(spec.out_dim))
        self.validate()

    # ========== ESTRUTURA ==========

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    def names(self) -> List[str]:
        """Nomes dos tensores diferenciáveis, em ordem estável."""
        return list(self.tensors.keys())

    def num_parameters(self) -> int:
        return int(sum(t.size for t in self.tensors.values()))

    def expected_shapes(self) -> Dict[str, Tuple[int, ...]]:
        shapes: Dict[str, Tuple[int, ...]] = {}
        for i, spec in enumerate(self.layers):
            shapes[f"W{i}"] = (spec.out_dim, spec.in_dim)
            if spec.bias:
                shapes[f"b{i}"] = (spec.out_dim,)
            if spec.norm != "none":
                shapes[f"g{i}"] = (spec.out_dim,)
                shapes[f"beta{i}"] = (spec.out_dim,)
        return shapes

    def validate(self):
        """Verifica compatibilidade entre camadas consecutivas e formas dos tensores."""
        if not self.layers:
            raise ConfigurationError("MLP sem camadas")
        for i in range(1, len(self.layers)):
            if self.layers[i - 1].out_dim != self.layers[i].in_dim:
                raise ConfigurationError(
                    f"Camadas incompatíveis: saída {i - 1} = {self.layers[i - 1].out_dim}, "
                    f"entrada {i} = {self.layers[i].in_dim}"
                )
        expected = self.expected_shapes()
        if set(expected) != set(self.tensors):
            raise ConfigurationError(
                f"Tensores inesperados: faltando {sorted(set(expected) - set(self.tensors))}, "
                f"extras {sorted(set(self.tensors) - set(expected))}"
            )
        for name, shape in expected.items():
            if self.tensors[name].shape != shape:
                raise ConfigurationError(f"{name}: forma {self.tensors[name].shape}, esperado {shape}")

    # ========== MUTAÇÃO ==========

    def mark_modified(self):
        """Registra mutação dos tensores (invalida tapes anteriores)."""
        self.version += 1

    def copy(self) -> "MlpParams":
        clone = MlpParams(
            [LayerSpec(**vars(s)) for s in self.layers],
            {k: v.copy() for k, v in self.tensors.items()},
            {k: v.copy() for k, v in self.running_mean.items()},
            {k: v.copy() for k, v in self.running_var.items()},
        )
        return clone

    def flat(self) -> np.ndarray:
        """Vetor com todos os parâmetros concatenados (ordem de names())."""
        return np.concatenate([self.tensors[k].ravel() for k in self.names()])


@dataclass
class TapeGradients:
    """Gradientes por tensor, mais o gradiente em relação à entrada."""
    tensors: Dict[str, np.ndarray]
    input_grad: Optional[np.ndarray] = None

    @classmethod
    def zeros_like(cls, params: MlpParams) -> "TapeGradients":
        return cls({k: np.zeros_like(v) for k, v in params.tensors.items()})

    def __add__(self, other: "TapeGradients") -> "TapeGradients":
        return TapeGradients({k: v + other.tensors[k] for k, v in self.tensors.items()})

    def scaled(self, factor: float) -> "TapeGradients":
        return TapeGradients({k: v * factor for k, v in self.tensors.items()})

    def flat(self) -> np.ndarray:
        return np.concatenate([v.ravel() for v in self.tensors.values()])

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in self.tensors.values())


@dataclass
class _LayerRecord:
    x: np.ndarray
    y: np.ndarray
    h: np.ndarray
    xhat: Optional[np.ndarray] = None
    inv_std: Optional[np.ndarray] = None
    batch_stats: bool = False


@dataclass
class Tape:
    """Registro opaco de um forward, consumido pelo backward."""
    params: MlpParams
    version: int
    mode: str
    squeeze: bool
    records: List[_LayerRecord] = field(default_factory=list)

    def hidden(self, layer: int) -> np.ndarray:
        """Saída (pós-ativação) da camada `layer`."""
        return self.records[layer].h


# ========== INICIALIZAÇÃO ==========

def build_layers(sizes: Sequence[int], hidden_activation: str, output_activation: str = "identity",
                 hidden_norm: str = "none", output_bias: bool = True) -> List[LayerSpec]:
    """Especificações para uma MLP com tamanhos [entrada, ocultas..., saída]."""
    if len(sizes) < 2:
        raise ConfigurationError(f"MLP precisa de ao menos 2 tamanhos, recebido {list(sizes)}")
    layers = []
    for i in range(len(sizes) - 1):
        last = i == len(sizes) - 2
        layers.append(LayerSpec(
            in_dim=int(sizes[i]),
            out_dim=int(sizes[i + 1]),
            activation=output_activation if last else hidden_activation,
            norm="none" if last else hidden_norm,
            bias=output_bias if last else True,
        ))
    return layers


def init_mlp(layers: Sequence[LayerSpec], rng: np.random.Generator) -> MlpParams:
    """
    Inicialização uniforme escalada pelo fan-in.

    He para relu, Xavier para tanh, LeCun para identity. Vieses zerados,
    afins de normalização em (1, 0).
    """
    tensors: Dict[str, np.ndarray] = {}
    for i, spec in enumerate(layers):
        if spec.activation == "relu":
            limit = np.sqrt(6.0 / spec.in_dim)
        elif spec.activation == "tanh":
            limit = np.sqrt(6.0 / (spec.in_dim + spec.out_dim))
        else:
            limit = np.sqrt(3.0 / spec.in_dim)
        tensors[f"W{i}"] = rng.uniform(-limit, limit, size=(spec.out_dim, spec.in_dim))
        if spec.bias:
            tensors[f"b{i}"] = np.zeros(spec.out_dim)
        if spec.norm != "none":
            tensors[f"g{i}"] = np.ones(spec.out_dim)
            tensors[f"beta{i}"] = np.zeros(spec.out_dim)
    params = MlpParams(layers, tensors)
    logger.debug(f"[AUTODIFF] MLP inicializada: {[s.in_dim for s in layers] + [layers[-1].out_dim]} "
                 f"({params.num_parameters()} parâmetros)")
    return params


# ========== FORWARD / BACKWARD ==========

def _activate(y: np.ndarray, activation: str) -> np.ndarray:
    if activation == "tanh":
        return np.tanh(y)
    if activation == "relu":
        return np.maximum(y, 0.0)
    return y


def forward(params: MlpParams, x: np.ndarray, mode: str = "eval",
            update_stats: bool = True) -> Tuple[np.ndarray, Tape]:
    """
    Avalia a rede e registra o tape.

    Args:
        params: Parâmetros da rede
        x: Vetor [in] ou batch [B×in]
        mode: "train" usa estatísticas do batch na batch_norm (e atualiza as
            médias móveis se update_stats); "eval" usa as médias móveis
        update_stats: Desliga a atualização das médias móveis em modo train

    Returns:
        (saída com o mesmo número de eixos da entrada, tape)
    """
    if mode not in MODES:
        raise ConfigurationError(f"Modo desconhecido: {mode}")
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != params.in_dim:
        raise ConfigurationError(f"Entrada com forma {x.shape}, rede espera largura {params.in_dim}")

    tape = Tape(params=params, version=params.version, mode=mode, squeeze=squeeze)
    h = x
    for i, spec in enumerate(params.layers):
        t = params.tensors
        z = h @ t[f"W{i}"].T
        if spec.bias:
            z = z + t[f"b{i}"]
        record = _LayerRecord(x=h, y=z, h=z)

        if spec.norm == "batch_norm":
            if mode == "train":
                if z.shape[0] < 2:
                    raise ConfigurationError("batch_norm em modo train exige batch >= 2")
                mu = z.mean(axis=0)
                var = z.var(axis=0)
                if update_stats:
                    params.running_mean[i] = BN_MOMENTUM * params.running_mean[i] + (1 - BN_MOMENTUM) * mu
                    params.running_var[i] = BN_MOMENTUM * params.running_var[i] + (1 - BN_MOMENTUM) * var
                record.batch_stats = True
            else:
                mu = params.running_mean[i]
                var = params.running_var[i]
            record.inv_std = 1.0 / np.sqrt(var + NORM_EPS)
            record.xhat = (z - mu) * record.inv_std
        elif spec.norm == "layer_norm":
            mu = z.mean(axis=1, keepdims=True)
            var = z.var(axis=1, keepdims=True)
            record.inv_std = 1.0 / np.sqrt(var + NORM_EPS)
            record.xhat = (z - mu) * record.inv_std

        if record.xhat is not None:
            record.y = t[f"g{i}"] * record.xhat + t[f"beta{i}"]

        h = _activate(record.y, spec.activation)
        record.h = h
        tape.records.append(record)

    return (h[0] if squeeze else h), tape


def backward(tape: Tape, upstream: np.ndarray,
             hidden_upstream: Optional[Dict[int, np.ndarray]] = None) -> TapeGradients:
    """
    Gradiente de (upstream · saída) em relação a todos os parâmetros.

    Args:
        tape: Tape de um forward com os parâmetros ainda inalterados
        upstream: Gradiente na saída, mesma forma da saída
        hidden_upstream: Gradientes extras injetados na saída de camadas
            ocultas {índice: [B×out_i]} (ex.: perdas sobre as features Φ)

    Returns:
        TapeGradients com input_grad preenchido
    """
    params = tape.params
    if params.version != tape.version:
        raise StaleTapeError(
            f"Tape da versão {tape.version}, parâmetros já na versão {params.version}"
        )
    dh = np.asarray(upstream, dtype=np.float64)
    if tape.squeeze:
        dh = dh.reshape(1, -1)
    out = tape.records[-1].h
    if dh.shape != out.shape:
        raise ConfigurationError(f"Upstream com forma {dh.shape}, saída tem {out.shape}")

    grads: Dict[str, np.ndarray] = {}
    for i in reversed(range(len(params.layers))):
        spec = params.layers[i]
        rec = tape.records[i]
        t = params.tensors
        if hidden_upstream and i in hidden_upstream:
            extra = np.asarray(hidden_upstream[i], dtype=np.float64)
            dh = dh + (extra.reshape(1, -1) if tape.squeeze else extra)

        if spec.activation == "tanh":
            dy = dh * (1.0 - rec.h ** 2)
        elif spec.activation == "relu":
            dy = dh * (rec.y > 0.0)
        else:
            dy = dh

        if spec.norm != "none":
            grads[f"g{i}"] = np.sum(dy * rec.xhat, axis=0)
            grads[f"beta{i}"] = np.sum(dy, axis=0)
            dxhat = dy * t[f"g{i}"]
            if spec.norm == "batch_norm" and rec.batch_stats:
                dz = rec.inv_std * (dxhat - dxhat.mean(axis=0)
                                    - rec.xhat * (dxhat * rec.xhat).mean(axis=0))
            elif spec.norm == "batch_norm":
                dz = dxhat * rec.inv_std
            else:
                dz = rec.inv_std * (dxhat - dxhat.mean(axis=1, keepdims=True)
                                    - rec.xhat * (dxhat * rec.xhat).mean(axis=1, keepdims=True))
        else:
            dz = dy

        grads[f"W{i}"] = dz.T @ rec.x
        if spec.bias:
            grads[f"b{i}"] = dz.sum(axis=0)
        dh = dz @ t[f"W{i}"]

    ordered = {name: grads[name] for name in params.names()}
    return TapeGradients(ordered, input_grad=dh[0] if tape.squeeze else dh)

"""
Configuração completa do sistema
================================
- AgentConfig: seletor de algoritmo e todos os hiperparâmetros
- EnvConfig: ambiente e parâmetros do demonstrador
- ExperimentConfig: protocolo completo (coleta → offline → online → avaliação)

Arquivo de configuração: um único documento JSON; chaves desconhecidas são
rejeitadas em qualquer nível. Sobrescritas no formato "agent.beta=0".
"""

import json
import logging
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Optional, Sequence

from core.errors import ConfigurationError

logger = logging.getLogger(__name__)

ALGORITHMS = ("simplified_q", "sac_cql", "crossq", "dr3", "layernorm", "bc")
# Algoritmos com rede alvo (média de Polyak)
TARGET_ALGORITHMS = ("sac_cql", "dr3", "layernorm")
NO_TARGET_ALGORITHMS = ("simplified_q", "crossq")
MU_MODES = ("uniform", "policy")
ENTROPY_MODES = ("fixed", "auto")
DEFAULT_POLYAK = 0.995
# (alpha, beta) quando a configuração não os fixa
DEFAULT_WEIGHTS = {
    "simplified_q": (1.0, 0.2),
    "sac_cql": (1.0, 0.0),
    "crossq": (0.0, 0.0),
    "dr3": (1.0, 0.2),
    "layernorm": (1.0, 0.0),
    "bc": (0.0, 0.0),
}


@dataclass
class AgentConfig:
    """Hiperparâmetros do agente (padrões de referência em escala de bancada)."""

    # === ALGORITMO ===
    algorithm: str = "simplified_q"

    # === OBJETIVO DO CRÍTICO ===
    alpha: Optional[float] = None      # peso do CQL (None: padrão do algoritmo)
    beta: Optional[float] = None       # peso do regularizador de features (None: padrão do algoritmo)
    n_step: int = 3
    gamma: float = 0.99
    ood_action_samples: int = 4
    ntk_action_samples: int = 1
    mu_mode: str = "uniform"
    weighted_cql: bool = True
    cql_data_term: bool = True
    target_polyak: Optional[float] = None
    num_critics: Optional[int] = None

    # === OTIMIZAÇÃO ===
    lr: float = 3e-4
    online_lr: Optional[float] = None
    batch_size: int = 512
    updates_per_episode: int = 60

    # === ENTROPIA ===
    entropy_mode: str = "auto"
    entropy_fixed_value: float = 0.0
    init_temperature: float = 0.1
    target_entropy: Optional[float] = None

    # === ARQUITETURA ===
    critic_hidden: int = 256
    critic_depth: int = 2
    policy_hidden: int = 64
    policy_depth: int = 2

    # === BUFFERS (ablações) ===
    symmetric_sampling: bool = True
    self_imitation: bool = True
    bootstrap_on_fault: bool = True

    def __post_init__(self):
        self._validar()

    def _validar(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigurationError(f"Algoritmo desconhecido: {self.algorithm} (opções: {', '.join(ALGORITHMS)})")
        if self.algorithm in NO_TARGET_ALGORITHMS and self.target_polyak is not None:
            raise ConfigurationError(f"{self.algorithm} não usa rede alvo: target_polyak deve ficar vazio")
        if self.target_polyak is not None and not 0.0 < self.target_polyak <= 1.0:
            raise ConfigurationError(f"target_polyak deve estar em (0, 1], recebido {self.target_polyak}")
        if self.cql_weight < 0 or self.regularizer_weight < 0:
            raise ConfigurationError("alpha e beta devem ser >= 0")
        if self.n_step < 1:
            raise ConfigurationError(f"n_step deve ser >= 1, recebido {self.n_step}")
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigurationError(f"gamma deve estar em [0, 1), recebido {self.gamma}")
        if self.lr <= 0 or self.online_learning_rate <= 0:
            raise ConfigurationError("Taxas de aprendizado devem ser > 0")
        if self.batch_size <= 0 or self.batch_size % 2 != 0:
            raise ConfigurationError(f"batch_size deve ser par e positivo, recebido {self.batch_size}")
        if self.updates_per_episode < 0:
            raise ConfigurationError("updates_per_episode deve ser >= 0")
        if self.ood_action_samples < 1 or self.ntk_action_samples < 1:
            raise ConfigurationError("ood_action_samples e ntk_action_samples devem ser >= 1")
        if self.mu_mode not in MU_MODES:
            raise ConfigurationError(f"mu_mode desconhecido: {self.mu_mode}")
        if self.entropy_mode not in ENTROPY_MODES:
            raise ConfigurationError(f"entropy_mode desconhecido: {self.entropy_mode}")
        if self.init_temperature <= 0:
            raise ConfigurationError("init_temperature deve ser > 0")
        if min(self.critic_hidden, self.critic_depth, self.policy_hidden, self.policy_depth) < 1:
            raise ConfigurationError("Larguras e profundidades das redes devem ser >= 1")
        if self.algorithm != "bc" and self.n_critics < 1:
            raise ConfigurationError("num_critics deve ser >= 1")

    # === VALORES EFETIVOS (padrões por algoritmo) ===
    @property
    def polyak(self) -> Optional[float]:
        """Polyak em uso; None para algoritmos sem rede alvo."""
        if self.algorithm not in TARGET_ALGORITHMS:
            return None
        return DEFAULT_POLYAK if self.target_polyak is None else self.target_polyak

    @property
    def n_critics(self) -> int:
        if self.num_critics is not None:
            return self.num_critics
        if self.algorithm == "bc":
            return 0
        return 2 if self.algorithm in TARGET_ALGORITHMS else 1

    @property
    def online_learning_rate(self) -> float:
        return self.lr if self.online_lr is None else self.online_lr

    @property
    def uses_target(self) -> bool:
        return self.algorithm in TARGET_ALGORITHMS

    @property
    def critic_norm(self) -> str:
        return {"crossq": "batch_norm", "layernorm": "layer_norm"}.get(self.algorithm, "none")

    @property
    def cql_weight(self) -> float:
        """alpha em uso: o valor fixado ou o padrão do algoritmo (crossq e bc sem CQL)."""
        return DEFAULT_WEIGHTS[self.algorithm][0] if self.alpha is None else self.alpha

    @property
    def regularizer_weight(self) -> float:
        return DEFAULT_WEIGHTS[self.algorithm][1] if self.beta is None else self.beta

    @classmethod
    def for_algorithm(cls, algorithm: str, **overrides) -> "AgentConfig":
        return cls(algorithm=algorithm, **overrides)


@dataclass
class EnvConfig:
    """Ambiente e demonstrador."""
    name: str = "grasp"
    horizon: Optional[int] = None
    demonstrator_gain: float = 2.0
    demonstrator_noise: float = 0.05

    def env_params(self) -> Dict[str, Any]:
        return {} if self.horizon is None else {"horizon": self.horizon}


@dataclass
class ExperimentConfig:
    """Protocolo do experimento (padrões de bancada; tudo sobrescrevível)."""
    env: EnvConfig = field(default_factory=EnvConfig)
    agent: AgentConfig = field(default_factory=AgentConfig)

    # === PROTOCOLO ===
    demonstrations: int = 50
    offline_steps: int = 20_000
    online_episodes: int = 200
    eval_attempts: int = 50
    seeds: List[int] = field(default_factory=lambda: [0, 1, 2])
    output_dir: str = "runs"

    # === DIAGNÓSTICOS ===
    diagnostics_every: int = 20          # episódios online
    offline_diagnostics_every: int = 5000  # passos de gradiente offline
    offline_eval_every: int = 0          # 0 desliga a avaliação periódica offline
    offline_metrics_every: int = 100     # passos offline por linha de métricas
    probe_pairs: int = 512
    probe_episodes: int = 20
    probe_seed: int = 12345
    similarity_clip: float = 10_000.0
    success_window: int = 10
    bootstrap_resamples: int = 2000

    # === REGISTRO ===
    record_wall_time: bool = False

    def __post_init__(self):
        if isinstance(self.env, dict):
            self.env = _from_dict(EnvConfig, self.env, "env")
        if isinstance(self.agent, dict):
            self.agent = _from_dict(AgentConfig, self.agent, "agent")
        self._validar()

    def _validar(self):
        from envs import ENVS

        ENVS.require(self.env.name)
        if not self.seeds:
            raise ConfigurationError("Lista de seeds vazia")
        for name in ("demonstrations", "offline_steps", "online_episodes", "eval_attempts",
                     "diagnostics_every", "offline_diagnostics_every", "offline_eval_every"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} deve ser >= 0")
        if self.probe_pairs < 2:
            raise ConfigurationError("probe_pairs deve ser >= 2")
        if self.offline_metrics_every < 1:
            raise ConfigurationError("offline_metrics_every deve ser >= 1")
        if self.success_window < 1:
            raise ConfigurationError("success_window deve ser >= 1")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def with_overrides(self, overrides: Sequence[str]) -> "ExperimentConfig":
        return experiment_config_from_dict(apply_overrides(self.to_dict(), overrides))


# ========== LEITURA ==========

def _from_dict(cls, data: Dict[str, Any], where: str):
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigurationError(f"Chaves desconhecidas em '{where}': {', '.join(unknown)}")
    return cls(**data)


def experiment_config_from_dict(data: Dict[str, Any]) -> ExperimentConfig:
    data = dict(data)
    env = _from_dict(EnvConfig, data.pop("env", {}) or {}, "env")
    agent = _from_dict(AgentConfig, data.pop("agent", {}) or {}, "agent")
    return _from_dict(ExperimentConfig, {**data, "env": env, "agent": agent}, "experimento")


def load_experiment_config(path: Optional[str], overrides: Sequence[str] = ()) -> ExperimentConfig:
    """
    Lê o JSON de configuração e aplica as sobrescritas.

    Args:
        path: Caminho do JSON (None usa os padrões)
        overrides: Lista "chave.subchave=valor"
    """
    data: Dict[str, Any] = {}
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ConfigurationError(f"{path}: o documento deve ser um objeto JSON")
        logger.info(f"[CONFIG] Configuração lida de {path}")
    return experiment_config_from_dict(apply_overrides(data, overrides))


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(data: Dict[str, Any], overrides: Sequence[str]) -> Dict[str, Any]:
    """Aplica "a.b=valor" (valor interpretado como JSON, senão string)."""
    result = json.loads(json.dumps(data))
    for item in overrides:
        if "=" not in item:
            raise ConfigurationError(f"Sobrescrita sem '=': {item}")
        key, raw = item.split("=", 1)
        path = key.strip().split(".")
        node = result
        for part in path[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigurationError(f"Sobrescrita inválida: '{key}' atravessa um valor escalar")
            node = child
        node[path[-1]] = _parse_value(raw)
    return result

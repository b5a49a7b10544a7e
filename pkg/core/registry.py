"""
Registry - Registro nomeado de factories
========================================
Mapeia nomes (ambientes, algoritmos, diagnósticos) para factories.

Exemplo de uso:
```python
ENVS = Registry("envs")
ENVS.register("grasp", lambda **kw: GraspEnv(**kw))
env = ENVS.resolve("grasp", horizon=60)
```
"""

import logging
from typing import Any, Callable, Dict, List, Optional

from core.errors import ConfigurationError


class Registry:
    """
    Registro de factories por nome.

    Funcionalidades:
    - Registro de factories (transient ou singleton)
    - Resolução com argumentos nomeados
    - Erro de configuração para nomes desconhecidos
    """

    def __init__(self, kind: str, logger: Optional[logging.Logger] = None):
        """
        Args:
            kind: Rótulo do que é registrado (usado nas mensagens de erro)
            logger: Logger opcional
        """
        self.kind = kind
        self._factories: Dict[str, Callable[..., Any]] = {}
        self._singleton_flags: Dict[str, bool] = {}
        self._singletons: Dict[str, Any] = {}
        self.logger = logger or logging.getLogger(f"Registry.{kind}")

    def register(self, name: str, factory: Callable[..., Any], singleton: bool = False):
        """
        Registra uma factory.

        Raises:
            ValueError: Se o nome já estiver registrado
        """
        if name in self._factories:
            raise ValueError(f"{self.kind}: '{name}' já registrado")
        self._factories[name] = factory
        self._singleton_flags[name] = singleton
        self.logger.debug(f"Registrado: {self.kind}/{name} (singleton={singleton})")

    def resolve(self, name: str, **kwargs) -> Any:
        """
        Cria (ou devolve o singleton de) `name`.

        Raises:
            ConfigurationError: Se o nome não estiver registrado
        """
        self.require(name)
        if self._singleton_flags[name] and name in self._singletons:
            return self._singletons[name]
        instance = self._factories[name](**kwargs)
        if self._singleton_flags[name]:
            self._singletons[name] = instance
        return instance

    def require(self, name: str):
        if name not in self._factories:
            raise ConfigurationError(
                f"{self.kind} desconhecido: '{name}' (disponíveis: {', '.join(self.names())})"
            )

    def names(self) -> List[str]:
        return sorted(self._factories)

    def __repr__(self) -> str:
        return f"Registry({self.kind}, names={self.names()})"

"""
Errors - Exceções específicas do sistema
========================================
Subclasses estreitas de ValueError/RuntimeError para que a CLI consiga
mapear cada falha para um código de saída.
"""


class ConfigurationError(ValueError):
    """Configuração inválida: dimensões, chaves desconhecidas, nomes inexistentes."""


class StaleTapeError(RuntimeError):
    """Backward chamado com tape cujos parâmetros foram alterados após o forward."""


class OptimizerFault(RuntimeError):
    """Gradientes não finitos entregues ao otimizador."""


class CollectionError(RuntimeError):
    """Demonstrador não produziu trajetórias suficientes dentro do orçamento."""


class BufferEmptyError(RuntimeError):
    """Amostragem pedida com os dois buffers vazios."""


class DivergenceError(RuntimeError):
    """Perda não finita durante o treino: a execução é interrompida."""


class CsvParseError(ValueError):
    """CSV de métricas malformado."""

    def __init__(self, path: str, line: int, reason: str):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {reason}")


class EmptyPlotError(ValueError):
    """CSV sem nenhuma linha de dados para desenhar."""

    def __init__(self, path: str):
        self.path = path
        super().__init__(f"{path}: nenhum dado para desenhar")

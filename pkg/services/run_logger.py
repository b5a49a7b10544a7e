"""
RUN LOGGER
==========
Logging por execução: arquivo <run_dir>/logs/run.log (DEBUG, formato
detalhado) mais console (INFO por padrão, formato curto).
"""

import logging
import os

FILE_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(funcName)s:%(lineno)d - %(message)s'
CONSOLE_FORMAT = '%(asctime)s - RUN - %(levelname)s - %(message)s'


class RunLogger:
    """
    Logger de uma execução (config, seed).

    FUNCIONALIDADES:
    - Arquivo de log dentro do diretório da execução
    - Sem duplicação de handlers ao reabrir a mesma execução
    - Nível do console ajustável (arquivo sempre em DEBUG)
    """

    def __init__(self, run_dir: str, name: str = "run", console_level: int = logging.INFO):
        """
        Args:
            run_dir: Diretório da execução
            name: Sufixo do nome do logger
            console_level: Nível do console
        """
        self.run_dir = run_dir
        self.log_file = os.path.join(run_dir, "logs", "run.log")
        self.console_level = console_level
        self.logger = logging.getLogger(f"run.{name}")
        self.logger.propagate = False

        if not self._has_file_handler():
            self._setup_logger()

    def _has_file_handler(self) -> bool:
        target = os.path.abspath(self.log_file)
        for handler in self.logger.handlers[:]:
            if isinstance(handler, logging.FileHandler):
                if handler.baseFilename == target:
                    return True
                # Handler de outra execução com o mesmo nome
                self.logger.removeHandler(handler)
                handler.close()
        return False

    def _setup_logger(self):
        os.makedirs(os.path.dirname(self.log_file), exist_ok=True)

        file_handler = logging.FileHandler(self.log_file, encoding='utf-8')
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(FILE_FORMAT, datefmt='%Y-%m-%d %H:%M:%S'))
        self.logger.addHandler(file_handler)

        if not self._console_handlers():
            console_handler = logging.StreamHandler()
            console_handler.setLevel(self.console_level)
            console_handler.setFormatter(logging.Formatter(CONSOLE_FORMAT, datefmt='%H:%M:%S'))
            self.logger.addHandler(console_handler)
        self.logger.setLevel(logging.DEBUG)
        self.logger.debug(f"[CLI] RunLogger inicializado em {self.log_file}")

    def _console_handlers(self):
        return [h for h in self.logger.handlers
                if isinstance(h, logging.StreamHandler) and not isinstance(h, logging.FileHandler)]

    def close(self):
        """Fecha e remove todos os handlers."""
        for handler in self.logger.handlers[:]:
            self.logger.removeHandler(handler)
            handler.close()

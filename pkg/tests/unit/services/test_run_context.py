"""
Testes Unitários para RunContext e RunLogger
"""

import json
import logging
import os

from config import __version__
from services.run_context import CONFIG_FILE, MANIFEST_FILE, RunContext, read_manifest


class TestRunContext:
    """Testes do diretório da execução."""

    def test_create_writes_config_and_manifest(self, tmp_path, tiny_experiment_config):
        run_dir = str(tmp_path / "run")

        context = RunContext.create(run_dir, tiny_experiment_config, seed=7)
        context.close()

        with open(os.path.join(run_dir, CONFIG_FILE)) as fh:
            assert json.load(fh) == json.loads(json.dumps(tiny_experiment_config.to_dict()))
        manifest = read_manifest(run_dir)
        assert manifest["seed"] == 7
        assert manifest["code_version"] == __version__
        assert manifest["env"] == "reacher"
        assert manifest["commands"] == []

    def test_paths(self, tmp_path, tiny_experiment_config):
        context = RunContext(run_dir=str(tmp_path), config=tiny_experiment_config, seed=0)

        assert context.metrics_path == str(tmp_path / "metrics.csv")
        assert context.offline_checkpoint == str(tmp_path / "checkpoints" / "offline.json")
        assert context.probe_path == str(tmp_path / "diagnostics" / "probe_set.npz")

    def test_record_command_appends(self, tmp_path, tiny_experiment_config):
        context = RunContext.create(str(tmp_path), tiny_experiment_config, seed=0)
        context.record_command("collect", {"demonstrations": 3})
        context.record_command("evaluate")
        context.close()

        commands = read_manifest(str(tmp_path))["commands"]

        assert [c["command"] for c in commands] == ["collect", "evaluate"]
        assert commands[0]["demonstrations"] == 3

    def test_open_keeps_history_and_seed(self, tmp_path, tiny_experiment_config):
        context = RunContext.create(str(tmp_path), tiny_experiment_config, seed=5)
        context.record_command("collect")
        context.close()

        reopened = RunContext.open(str(tmp_path))
        reopened.close()

        assert reopened.seed == 5
        assert reopened.config.agent.batch_size == 8
        assert len(read_manifest(str(tmp_path))["commands"]) == 1

    def test_missing_manifest_is_empty(self, tmp_path):
        assert read_manifest(str(tmp_path)) == {}
        assert not os.path.exists(tmp_path / MANIFEST_FILE)


class TestRunLogger:

    def test_log_file_in_run_dir(self, tmp_path, tiny_experiment_config):
        context = RunContext.create(str(tmp_path / "a"), tiny_experiment_config, seed=0,
                                    console_level=logging.WARNING)
        context.logger.debug("[TEST] detalhe")
        context.close()

        with open(tmp_path / "a" / "logs" / "run.log", encoding="utf-8") as fh:
            assert "[TEST] detalhe" in fh.read()

    def test_reopen_does_not_duplicate_handlers(self, tmp_path, tiny_experiment_config):
        first = RunContext.create(str(tmp_path / "b"), tiny_experiment_config, seed=0)
        handlers = len(first.logger.handlers)

        second = RunContext.create(str(tmp_path / "b"), tiny_experiment_config, seed=0)

        assert len(second.logger.handlers) == handlers
        second.close()

"""
Main - Entrada de linha de comando do Simplified Q
==================================================

Pipeline de uma execução (config, seed):
1. collect         demonstrações do demonstrador roteirizado
2. train-offline   passos de gradiente só em D_off
3. train-online    episódios + atualizações em batches simétricos
4. evaluate        rollouts determinísticos (ação média)
5. diagnose        similaridade, rastreio de Q, histogramas, campo de gradiente
6. plot            SVGs a partir dos CSVs

Uso:
    python main.py collect --config exp.json --seed 0 --out runs/grasp_s0
    python main.py train-offline --out runs/grasp_s0
    python main.py train-online --out runs/grasp_s0 --override agent.online_lr=1e-4
    python main.py evaluate --out runs/grasp_s0 --policy demonstrator
    python main.py diagnose similarity q_trace --out runs/grasp_s0
    python main.py plot runs/grasp_s0/metrics.csv --out runs/grasp_s0/plots
    python main.py sweep --config exp.json --grid agent.beta=0,0.2 --out runs/sweep --jobs 3

Códigos de saída: 0 sucesso, 1 erro inesperado, 2 divergência, 3 configuração, 4 E/S.
"""

import argparse
import json
import logging
import os
import sys
from typing import List, Optional

from config.config_completa import ExperimentConfig, load_experiment_config
from core.errors import ConfigurationError, CsvParseError, DivergenceError, EmptyPlotError
from services.run_context import CONFIG_FILE, RunContext, read_manifest

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_DIVERGENCE = 2
EXIT_CONFIGURATION = 3
EXIT_IO = 4


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Documento JSON de configuração")
    common.add_argument("--seed", type=int, help="Seed da execução (padrão: primeira de config.seeds)")
    common.add_argument("--out", help="Diretório da execução")
    common.add_argument("--override", action="append", default=[], metavar="CHAVE=VALOR",
                        help="Sobrescrita da configuração, ex.: agent.beta=0 (repetível)")
    common.add_argument("--debug", action="store_true", help="Ativa logging detalhado")

    parser = argparse.ArgumentParser(description="Simplified Q: treino offline-para-online em ambientes de bancada")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("collect", parents=[common], help="Coleta demonstrações")
    sub.add_parser("train-offline", parents=[common], help="Fase offline a partir do dataset")

    online = sub.add_parser("train-online", parents=[common], help="Fase online a partir de um checkpoint")
    online.add_argument("--checkpoint", help="Checkpoint inicial (padrão: checkpoints/offline.json)")

    evaluate = sub.add_parser("evaluate", parents=[common], help="Avaliação determinística")
    evaluate.add_argument("--policy", choices=("checkpoint", "demonstrator", "random"), default="checkpoint")
    evaluate.add_argument("--checkpoint", help="Checkpoint avaliado (padrão: o mais recente)")
    evaluate.add_argument("--attempts", type=int, help="Tentativas (padrão: eval_attempts)")

    diagnose = sub.add_parser("diagnose", parents=[common], help="Diagnósticos em CSV")
    diagnose.add_argument("which", nargs="*", help="similarity q_trace action_histogram gradient_field "
                                                   "run_statistics arrow_frames")
    diagnose.add_argument("--checkpoint", help="Checkpoint analisado (padrão: o mais recente)")

    plot = sub.add_parser("plot", parents=[common], help="SVGs a partir de CSVs")
    plot.add_argument("files", nargs="+", help="CSVs de métricas ou de diagnóstico")
    plot.add_argument("--window", type=int, default=10)

    sweep = sub.add_parser("sweep", parents=[common], help="Grade de sobrescritas × seeds")
    sweep.add_argument("--grid", action="append", default=[], metavar="CHAVE=V1,V2",
                       help="Eixo da grade (repetível)")
    sweep.add_argument("--jobs", type=int, default=1, help="Processos em paralelo")

    sub.add_parser("pipeline", parents=[common], help="collect -> offline -> online -> evaluate")
    return parser


class HarnessCli:
    """Resolve configuração e diretório e despacha o subcomando."""

    def __init__(self, debug: bool = False):
        level = logging.DEBUG if debug else logging.INFO
        logging.basicConfig(
            level=level,
            format='[%(name)s] %(levelname)s: %(message)s',
        )
        self.console_level = level
        self.logger = logging.getLogger("HarnessCli")

    # ========== CONFIGURAÇÃO ==========

    def resolve_config(self, args: argparse.Namespace) -> ExperimentConfig:
        """--config, senão a cópia gravada no diretório da execução, senão os padrões."""
        if args.config:
            return load_experiment_config(args.config, args.override)
        if args.out and os.path.exists(os.path.join(args.out, CONFIG_FILE)):
            return load_experiment_config(os.path.join(args.out, CONFIG_FILE), args.override)
        return load_experiment_config(None, args.override)

    def resolve_seed(self, args: argparse.Namespace, config: ExperimentConfig) -> int:
        if args.seed is not None:
            return args.seed
        if args.out:
            seed = read_manifest(args.out).get("seed")
            if seed is not None:
                return int(seed)
        return config.seeds[0]

    def open_context(self, args: argparse.Namespace) -> RunContext:
        config = self.resolve_config(args)
        seed = self.resolve_seed(args, config)
        out = args.out or os.path.join(config.output_dir,
                                       f"{config.env.name}_{config.agent.algorithm}_seed{seed}")
        return RunContext.create(out, config, seed, self.console_level)

    # ========== DESPACHO ==========

    def dispatch(self, args: argparse.Namespace) -> int:
        from services import commands

        if args.command == "plot":
            from services.plotting import plot_files

            config = self.resolve_config(args) if args.config else None
            out_dir = args.out or os.path.join(os.path.dirname(os.path.abspath(args.files[0])), "plots")
            clip = config.similarity_clip if config is not None else None
            for path in plot_files(args.files, out_dir, args.window, clip=clip):
                print(path)
            return EXIT_OK

        if args.command == "sweep":
            config = self.resolve_config(args)
            out_root = args.out or os.path.join(config.output_dir, "sweep")
            summary = commands.cmd_sweep(config, args.grid, out_root, args.jobs, logger=self.logger)
            failures = [r["returncode"] for r in summary["runs"] if r["returncode"] != 0]
            return failures[0] if failures else EXIT_OK

        context = self.open_context(args)
        try:
            if args.command == "collect":
                commands.cmd_collect(context)
            elif args.command == "train-offline":
                commands.cmd_train_offline(context)
            elif args.command == "train-online":
                commands.cmd_train_online(context, args.checkpoint)
            elif args.command == "evaluate":
                result = commands.cmd_evaluate(context, args.policy, args.checkpoint, args.attempts)
                print(json.dumps(result.to_dict(), indent=2))
            elif args.command == "diagnose":
                for path in commands.cmd_diagnose(context, args.which, args.checkpoint):
                    print(path)
            elif args.command == "pipeline":
                result = commands.run_pipeline(context)
                print(json.dumps(result.to_dict(), indent=2))
            return EXIT_OK
        finally:
            context.close()

    def run(self, args: argparse.Namespace) -> int:
        """Executa o subcomando e mapeia exceções para códigos de saída."""
        try:
            return self.dispatch(args)
        except DivergenceError as e:
            self.logger.error(f"[CLI] Divergência: {e}")
            return EXIT_DIVERGENCE
        except ConfigurationError as e:
            self.logger.error(f"[CLI] Erro de configuração: {e}")
            return EXIT_CONFIGURATION
        except (OSError, json.JSONDecodeError, CsvParseError, EmptyPlotError) as e:
            self.logger.error(f"[CLI] Erro de E/S: {e}")
            return EXIT_IO
        except Exception as e:
            self.logger.error(f"[CLI] Erro durante {args.command}: {e}", exc_info=True)
            return EXIT_FAILURE


def main(argv: Optional[List[str]] = None) -> int:
    """Função principal."""
    args = build_parser().parse_args(argv)
    return HarnessCli(debug=args.debug).run(args)


if __name__ == "__main__":
    sys.exit(main())

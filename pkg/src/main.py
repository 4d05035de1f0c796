"""
Interface de linha de comando.

Subcomandos: rates, simulate (e o apelido sweep), figure1 e oracle-check.
Códigos de saída: 0 sucesso, 1 validação/uso, 2 erro de execução ou de E/S,
3 invariante violado.
"""

import argparse
import json
import logging
import secrets
import sys

from agents.figure1 import Figure1Agent
from agents.oracle_checker import OracleCheckerAgent
from agents.rates_reporter import RatesReporterAgent
from graph import SimulationWorkflow
from group_testing import __version__
from group_testing.design import SEED_LIMIT
from group_testing.errors import ConfigValidationError, InvariantViolationError
from tools.simulation import load_run_config
from utils.utils import setup_logging

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_INVARIANT = 3


class ArgumentParser(argparse.ArgumentParser):
    """Erros de uso saem com o código de validação."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: erro: {message}\n")


def _int_list(value: str) -> list[int]:
    try:
        return [int(v) for v in value.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"lista de inteiros inválida: '{value}'") from None


def _seed(value: str) -> int:
    seed = int(value)
    if not 0 <= seed < SEED_LIMIT:
        raise argparse.ArgumentTypeError("a semente deve estar em [0, 2^64)")
    return seed


def build_parser() -> ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="diretório de saída (sobrescreve BGT_OUTPUT_DIR)")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--params", help="arquivo de parâmetros (padrão: conf/parameters.yaml)")

    parser = ArgumentParser(
        prog="bgt", description="Group testing não adaptativo com matrizes Bernoulli."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    rates = sub.add_parser("rates", parents=[common], help="limites de taxa e de número de testes")
    rates.add_argument("--theta", type=float)
    rates.add_argument("--n", type=int)
    rates.add_argument("--k", type=int)
    density = rates.add_mutually_exclusive_group()
    density.add_argument("--p", type=float)
    density.add_argument("--nu", type=float)
    rates.add_argument("--save", action="store_true", help="salva também o CSV")

    for name in ("simulate", "sweep"):
        simulate = sub.add_parser(name, parents=[common], help="varredura de Monte Carlo")
        simulate.add_argument("--config", help="arquivo YAML plano da execução")
        simulate.add_argument("--n", type=int)
        simulate.add_argument("--k", type=int)
        density = simulate.add_mutually_exclusive_group()
        density.add_argument("--p", type=float)
        density.add_argument("--nu", type=float)
        simulate.add_argument("--tests", "--t-grid", dest="t_grid", type=_int_list)
        simulate.add_argument("--trials", type=int)
        simulate.add_argument("--decoder", dest="decoders", action="append")
        simulate.add_argument("--seed", type=_seed)
        simulate.add_argument("--threads", type=int)
        simulate.add_argument("--delta", type=float)
        simulate.add_argument("--grid-points", dest="grid_points", type=int)
        simulate.add_argument("--reference")
        simulate.add_argument("--record-trials", dest="record_trials", action="store_true", default=None)

    figure = sub.add_parser("figure1", parents=[common], help="curvas de taxa em função de θ")
    figure.add_argument("--grid-start", dest="grid_start", type=float)
    figure.add_argument("--grid-stop", dest="grid_stop", type=float)
    figure.add_argument("--grid-points", dest="grid_points", type=int)

    oracle = sub.add_parser("oracle-check", parents=[common], help="bateria de invariantes")
    oracle.add_argument("--seeds", type=int)
    oracle.add_argument("--min-n", dest="min_n", type=int)
    oracle.add_argument("--max-n", dest="max_n", type=int)
    oracle.add_argument("--max-k", dest="max_k", type=int)
    oracle.add_argument("--seed", type=_seed)
    return parser


def _resolve_seed(seed: int | None) -> int:
    """Sem semente explícita, sorteia uma e a exibe para permitir a repetição."""
    if seed is not None:
        return seed
    seed = secrets.randbits(64)
    banner = f"SEMENTE SORTEADA: {seed}  (use --seed {seed} para repetir)"
    print("=" * len(banner), file=sys.stderr)
    print(banner, file=sys.stderr)
    print("=" * len(banner), file=sys.stderr)
    logging.warning(banner)
    return seed


def _print_table(table, fmt: str):
    if fmt == "json":
        print(table.to_json(orient="records", indent=2))
    else:
        print(table.to_csv(index=False, float_format="%.6g"), end="")


def cmd_rates(args) -> int:
    agent = RatesReporterAgent(
        config_path=args.params,
        theta=args.theta,
        n=args.n,
        k=args.k,
        p=args.p,
        nu=args.nu,
        output_dir=args.out,
    )
    result = agent.run(write_csv=args.save or args.out is not None)
    if result is None:
        return EXIT_RUNTIME
    _print_table(result["table"], args.format)
    return EXIT_OK


def cmd_simulate(args) -> int:
    run_config = load_run_config(args.config)
    overrides = {
        key: getattr(args, key)
        for key in (
            "n", "k", "p", "nu", "t_grid", "trials", "decoders", "threads",
            "delta", "grid_points", "reference", "record_trials",
        )
        if getattr(args, key) is not None
    }
    if overrides.get("p") is not None:
        run_config.pop("nu", None)
    if overrides.get("nu") is not None:
        run_config.pop("p", None)
    run_config.update(overrides)
    if args.seed is not None or not {"seed", "master_seed"} & run_config.keys():
        run_config.pop("master_seed", None)
        run_config["seed"] = _resolve_seed(args.seed)

    workflow = SimulationWorkflow(config_path=args.params)
    state = workflow.run(run_config, output_dir=args.out)

    summary = {
        "config_hash": state["config_hash"],
        "master_seed": state["master_seed"],
        "curve_csv_path": state["curve_csv_path"],
        "curve_json_path": state["curve_json_path"],
        "threshold_file_path": state["threshold_file_path"],
        "manifest_file_path": state["manifest_file_path"],
        "thresholds": state["thresholds"],
    }
    if args.format == "json":
        print(json.dumps(summary, ensure_ascii=False, indent=2))
    else:
        print(f"curva: {summary['curve_csv_path']}")
        for decoder, estimate in state["thresholds"]["empirical"].items():
            T = estimate.get("T")
            text = f"{T:.1f}" if T is not None else "sem cruzamento"
            print(f"limiar {decoder} (nível {state['thresholds']['level']}): {text}")
        print(f"manifesto: {summary['manifest_file_path']}")
    return EXIT_OK


def cmd_figure1(args) -> int:
    agent = Figure1Agent(
        config_path=args.params,
        grid_start=args.grid_start,
        grid_stop=args.grid_stop,
        grid_points=args.grid_points,
        output_dir=args.out,
    )
    result = agent.run()
    if result is None:
        return EXIT_RUNTIME
    _print_table(result["table"], args.format)
    return EXIT_OK


def cmd_oracle_check(args, comp_decoder=None) -> int:
    params = {
        "seeds": args.seeds,
        "min_n": args.min_n,
        "max_n": args.max_n,
        "max_k": args.max_k,
        "output_dir": args.out,
    }
    if comp_decoder is not None:
        params["comp_decoder"] = comp_decoder
    agent = OracleCheckerAgent(_resolve_seed(args.seed), config_path=args.params, **params)
    result = agent.run()
    if result is None:
        return EXIT_RUNTIME
    report = result["report"]
    if args.format == "json":
        print(json.dumps(report.to_dict(), ensure_ascii=False, indent=2))
    else:
        print(f"instâncias: {report.instances}")
        for name in report.checked:
            print(f"{name}: {report.checked[name]} verificados, {report.violations[name]} violações")
    if not report.passed:
        raise InvariantViolationError(
            f"Invariantes violados: {report.counterexamples}"
        )
    return EXIT_OK


COMMANDS = {
    "rates": cmd_rates,
    "simulate": cmd_simulate,
    "sweep": cmd_simulate,
    "figure1": cmd_figure1,
    "oracle-check": cmd_oracle_check,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.params)
    try:
        return COMMANDS[args.command](args)
    except InvariantViolationError as e:
        logging.error(f"Verificação reprovada: {e}")
        print(f"FALHA: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except ConfigValidationError as e:
        print(str(e), file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as e:
        logging.error(f"Erro de validação: {e}")
        print(f"erro: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except (OSError, RuntimeError) as e:
        logging.error(f"Erro de execução: {e}")
        print(f"erro: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

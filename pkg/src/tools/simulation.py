import os
import json
import logging

import yaml

from group_testing.experiments import ExperimentConfig, SuccessCurve, sweep_tests
from group_testing.oracle import EnumerationCaps
from utils.utils import setup_logging, load_config, resolve_output_dir


def load_run_config(run_config_path: str | None) -> dict:
    """
    Lê o arquivo plano de configuração de uma execução (YAML chave-valor).
    """
    if not run_config_path:
        return {}
    with open(run_config_path, "r", encoding="utf-8") as f:
        try:
            data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ValueError(f"Arquivo de execução '{run_config_path}' inválido: {e}") from e
    if not isinstance(data, dict):
        raise ValueError(
            f"O arquivo de execução '{run_config_path}' deve conter pares chave-valor."
        )
    return data


def experiment_defaults(config: dict) -> dict:
    """Valores padrão de ExperimentConfig vindos de conf/parameters.yaml."""
    experiments_cfg = config["experiments"]
    return {
        "trials": experiments_cfg["default_trials"],
        "delta": experiments_cfg["default_delta"],
        "grid_points": experiments_cfg["default_grid_points"],
        "reference": experiments_cfg["default_reference"],
        "threads": experiments_cfg["threads"],
        "sss_max_n": experiments_cfg["sss_max_n"],
        "confidence": experiments_cfg["confidence"],
        "sss_budget": config["decoders"]["sss_node_budget"],
        "max_cells": config["design"]["max_cells"],
        "dense_threshold": config["design"]["dense_threshold"],
        "oracle_caps": EnumerationCaps.from_config(config["oracle"]),
    }


class SimulationTool:
    """
    Classe responsável por rodar a varredura de Monte Carlo e salvar a curva de sucesso.
    """

    def __init__(
        self,
        run_config: dict,
        output_dir: str | None = None,
        config_path: str | None = None,
    ):
        """
        Inicializa a simulação, configura o logging e valida a configuração da execução.
        """
        setup_logging(config_path)
        try:
            config = load_config(config_path)
            self.cfg = config["experiments"]
            self.output_cfg = config["output"]
            defaults = experiment_defaults(config)
        except (FileNotFoundError, KeyError) as e:
            logging.error(
                f"Falha ao carregar configuração para SimulationTool. Detalhes: {e}"
            )
            raise ValueError("Erro de configuração impede a continuação.") from e

        self.experiment = ExperimentConfig.from_dict(run_config, defaults)
        self.output_dir = resolve_output_dir(self.output_cfg, output_dir)

    def _save_curve_csv(self, curve: SuccessCurve) -> str:
        """Salva uma linha por (decodificador, T). (Método privado)"""
        filepath = os.path.join(self.output_dir, self.cfg.get("curve_csv_filename", "curve.csv"))
        curve.to_frame().to_csv(
            filepath, index=False, float_format=self.cfg["csv_float_format"]
        )
        logging.info(f"Arquivo '{filepath}' salvo com sucesso.")
        return filepath

    def _save_curve_json(self, curve: SuccessCurve) -> str:
        """Salva a curva completa, em precisão total. (Método privado)"""
        filepath = os.path.join(self.output_dir, self.cfg.get("curve_json_filename", "curve.json"))
        with open(filepath, "w", encoding="utf-8") as f:
            json.dump(curve.to_dict(), f, ensure_ascii=False, indent=4)
        logging.info(f"Arquivo '{filepath}' salvo com sucesso.")
        return filepath

    def run_simulation(self) -> dict | None:
        """
        Orquestra a varredura e o salvamento dos resultados.
        Retorna um dicionário com os caminhos dos arquivos gerados ou None em caso de falha.
        """
        logging.info("--- Iniciando simulação de Monte Carlo (via Tool) ---")
        curve = sweep_tests(self.experiment)
        try:
            os.makedirs(self.output_dir, exist_ok=True)
            csv_path = self._save_curve_csv(curve)
            json_path = self._save_curve_json(curve)
        except (IOError, OSError) as e:
            logging.error(f"Falha ao salvar a curva de sucesso em '{self.output_dir}': {e}")
            return None

        logging.info("=" * 50)
        logging.info(f"SUCESSO: {len(curve.points)} pontos simulados.")
        logging.info("=" * 50)
        return {"curve_csv_path": csv_path, "curve_json_path": json_path}

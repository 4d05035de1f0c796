import os
import logging

import pandas as pd

from group_testing.experiments import default_theta_grid, figure1_data
from tools.manifest import RunManifest, save_manifest
from utils.utils import setup_logging, load_config, resolve_output_dir


class Figure1Tool:
    """
    Gera a tabela das quatro curvas de taxa (limite de contagem, capacidade,
    DD e COMP) sobre uma grade de θ, pronta para ser plotada externamente.
    """

    def __init__(
        self,
        grid_start: float | None = None,
        grid_stop: float | None = None,
        grid_points: int | None = None,
        output_dir: str | None = None,
        config_path: str | None = None,
    ):
        setup_logging(config_path)
        try:
            config = load_config(config_path)
            self.cfg = config["figure1"]
            self.output_cfg = config["output"]
        except (FileNotFoundError, KeyError) as e:
            logging.error(f"Falha ao carregar configuração para Figure1Tool. Detalhes: {e}")
            raise ValueError("Erro de configuração impede a continuação.") from e

        self.grid_start = float(grid_start if grid_start is not None else self.cfg["grid_start"])
        self.grid_stop = float(grid_stop if grid_stop is not None else self.cfg["grid_stop"])
        self.grid_points = int(grid_points if grid_points is not None else self.cfg["grid_points"])
        if not 0.0 < self.grid_start <= self.grid_stop < 1.0 or self.grid_points < 1:
            raise ValueError(
                f"Grade de theta inválida: [{self.grid_start}, {self.grid_stop}] "
                f"com {self.grid_points} pontos; exige 0 < início <= fim < 1."
            )
        self.output_dir = output_dir

    def build_table(self) -> pd.DataFrame:
        grid = default_theta_grid(self.grid_start, self.grid_stop, self.grid_points)
        return figure1_data(grid)

    def run_figure1(self, write_csv: bool = True) -> dict | None:
        """
        Monta a tabela e salva o CSV e o manifesto.
        Retorna um dicionário com a tabela e os caminhos gerados, ou None em caso de falha.
        """
        logging.info("--- Iniciando geração dos dados da figura de taxas (via Tool) ---")
        table = self.build_table()
        result = {"table": table}
        if not write_csv:
            return result

        output_dir = resolve_output_dir(self.output_cfg, self.output_dir)
        manifest = RunManifest(
            command="figure1",
            config={
                "grid_start": self.grid_start,
                "grid_stop": self.grid_stop,
                "grid_points": self.grid_points,
            },
        )
        try:
            os.makedirs(output_dir, exist_ok=True)
            filepath = os.path.join(output_dir, self.cfg["output_filename"])
            table.to_csv(filepath, index=False, float_format=self.cfg["float_format"])
            logging.info(f"Arquivo '{filepath}' salvo com sucesso.")
        except (IOError, OSError) as e:
            logging.error(f"Falha ao salvar os dados da figura em '{output_dir}': {e}")
            return None

        manifest.output_files["figure1_file_path"] = filepath
        result["figure1_file_path"] = filepath
        result["manifest_file_path"] = save_manifest(manifest, output_dir)
        return result

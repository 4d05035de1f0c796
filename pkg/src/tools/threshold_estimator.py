import os
import json
import logging

import pandas as pd

from group_testing.errors import NoCrossingError
from group_testing.experiments import crossing, exact_comp_curve
from utils.utils import setup_logging, load_config


class ThresholdEstimatorTool:
    """
    Classe responsável por localizar a transição de fase na curva de sucesso
    salva em CSV e compará-la com a curva exata do COMP.
    """

    def __init__(
        self,
        curve_csv_path: str,
        n: int,
        k: int,
        p: float,
        level: float | None = None,
        config_path: str | None = None,
    ):
        """
        Inicializa o estimador, configura o logging e carrega as configurações.
        """
        setup_logging(config_path)
        self.curve_csv_path = curve_csv_path
        self.n = n
        self.k = k
        self.p = p
        try:
            config = load_config(config_path)
            self.cfg = config["threshold_estimator"]
        except (FileNotFoundError, KeyError) as e:
            logging.error(
                f"Falha ao carregar configuração para ThresholdEstimatorTool. Detalhes: {e}"
            )
            raise ValueError("Erro de configuração impede a continuação.") from e
        self.level = float(level if level is not None else self.cfg["level"])

    def _load_curve(self) -> pd.DataFrame | None:
        """
        Carrega a curva de sucesso do arquivo CSV.
        (Método privado)
        """
        try:
            df = pd.read_csv(self.curve_csv_path)
            logging.info(f"Curva carregada de '{self.curve_csv_path}'.")
            return df
        except FileNotFoundError:
            logging.error(f"Erro: O arquivo '{self.curve_csv_path}' não foi encontrado.")
            return None
        except Exception as e:
            logging.error(f"Erro inesperado ao ler o arquivo '{self.curve_csv_path}': {e}")
            return None

    def _estimate(self, T_values, successes) -> dict:
        """Cruzamento do nível, ou o motivo de não haver um. (Método privado)"""
        try:
            return crossing(T_values, successes, self.level).to_dict()
        except NoCrossingError as e:
            logging.warning(f"Sem cruzamento do nível {self.level}: {e}")
            return {"T": None, "level": self.level, "error": str(e)}

    def estimate_thresholds(self, df: pd.DataFrame) -> dict:
        thresholds = {}
        for decoder, group in df.groupby("decoder", sort=False):
            group = group.sort_values("T")
            thresholds[decoder] = self._estimate(group["T"].to_numpy(), group["success"].to_numpy())

        result = {"level": self.level, "empirical": thresholds}
        if 0.0 < self.p < 1.0:
            T_grid = sorted(df["T"].unique())
            exact = exact_comp_curve(self.n, self.k, self.p, T_grid)
            result["exact_comp"] = {
                "T_grid": [int(t) for t in T_grid],
                "success": [float(v) for v in exact],
                "crossing": self._estimate(T_grid, exact),
            }
        return result

    def run_threshold_estimation(self) -> dict | None:
        """
        Estima o limiar de cada decodificador e salva o resultado em JSON.
        Retorna um dicionário com o caminho do arquivo e o resumo, ou None em caso de falha.
        """
        logging.info("--- Iniciando estimativa de limiar (via Tool) ---")
        df = self._load_curve()
        if df is None:
            logging.error(
                "Estimativa de limiar interrompida devido à falha no carregamento da curva."
            )
            return None

        thresholds = self.estimate_thresholds(df)
        output_dir = os.path.dirname(self.curve_csv_path) or "."
        filepath = os.path.join(output_dir, self.cfg["output_filename"])
        try:
            with open(filepath, "w", encoding="utf-8") as f:
                json.dump(thresholds, f, ensure_ascii=False, indent=4)
            logging.info(f"Arquivo '{filepath}' salvo com sucesso.")
        except (IOError, OSError) as e:
            logging.error(f"Falha ao salvar o arquivo '{filepath}': {e}")
            return None
        return {"threshold_file_path": filepath, "thresholds": thresholds}

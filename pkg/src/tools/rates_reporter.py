import os
import math
import logging

import pandas as pd

from group_testing import rates
from group_testing.errors import DegenerateBoundError, DomainError
from tools.manifest import RunManifest, save_manifest
from utils.utils import setup_logging, load_config, resolve_output_dir

RATES_COLUMNS = ["quantity", "value", "nu", "regime"]


class RatesReporterTool:
    """
    Calcula os limites de taxa e de número de testes para um θ ou para um par (n, k).
    """

    def __init__(
        self,
        theta: float | None = None,
        n: int | None = None,
        k: int | None = None,
        p: float | None = None,
        nu: float | None = None,
        output_dir: str | None = None,
        config_path: str | None = None,
    ):
        """
        Inicializa o calculador, configura o logging e carrega as configurações.
        """
        setup_logging(config_path)
        if theta is None and (n is None or k is None):
            raise DomainError("Informe --theta ou o par --n e --k.")
        if p is not None and nu is not None:
            raise DomainError("Informe p ou nu, não ambos.")
        self.theta = theta
        self.n = n
        self.k = k
        self.p = p
        self.nu = nu
        self.output_dir = output_dir
        try:
            config = load_config(config_path)
            self.cfg = config["rates_reporter"]
            self.output_cfg = config["output"]
        except (FileNotFoundError, KeyError) as e:
            logging.error(
                f"Falha ao carregar configuração para RatesReporterTool. Detalhes: {e}"
            )
            raise ValueError("Erro de configuração impede a continuação.") from e

    def _theta_rows(self, theta: float) -> list[dict]:
        """Linhas dos limites assintóticos em θ. (Método privado)"""
        capacity = rates.capacity(theta)
        rows = [
            {"quantity": "theta", "value": theta, "nu": None},
            {
                "quantity": "capacity",
                "value": capacity.value,
                "nu": capacity.optimal_nu,
                "regime": capacity.regime,
            },
            {"quantity": "counting_bound", "value": rates.counting_bound(theta).value, "nu": None},
            {"quantity": "comp_max_rate", "value": rates.comp_max_rate(theta).value, "nu": 1.0},
            {"quantity": "dd_rate", "value": rates.dd_rate(theta).value, "nu": 1.0},
            {"quantity": "adaptive_gap", "value": rates.adaptive_gap(theta), "nu": None},
            {"quantity": "theta_star", "value": rates.theta_star(), "nu": None},
        ]
        return rows

    def _scale_rows(self, n: int, k: int) -> list[dict]:
        """Linhas dos limiares de número de testes para (n, k). (Método privado)"""
        if self.p is not None:
            nu = rates.p_to_nu(self.p, k)
        else:
            nu = self.nu if self.nu is not None else 1.0
        p = self.p if self.p is not None else rates.nu_to_p(nu, k)

        t_star = rates.t_star(n, k)
        rows = [
            {"quantity": "n", "value": n, "nu": None},
            {"quantity": "k", "value": k, "nu": None},
            {"quantity": "p", "value": p, "nu": nu},
            {"quantity": "log2_binom", "value": rates.log_binom(n, k), "nu": None},
            {"quantity": "T_star", "value": t_star.value, "nu": t_star.optimal_nu},
            {"quantity": "T_COMP", "value": rates.t_comp(n, k, nu).value, "nu": nu},
        ]
        try:
            rows.append({"quantity": "T_typ", "value": rates.t_typ(n, k, p).value, "nu": nu})
        except DegenerateBoundError as e:
            logging.warning(f"T_typ não reportado: {e}")
        if k >= 2:
            t_sss = rates.t_sss(n, k)
            rows.append({"quantity": "T_SSS", "value": t_sss.value, "nu": t_sss.optimal_nu})
        theta = math.log(k) / math.log(n)
        if 0.0 < theta < 1.0:
            rows.extend(row for row in self._theta_rows(theta) if row["quantity"] != "theta_star")
        return rows

    def build_rates_table(self) -> pd.DataFrame:
        rows = []
        if self.theta is not None:
            rows.extend(self._theta_rows(float(self.theta)))
        if self.n is not None and self.k is not None:
            rows.extend(self._scale_rows(int(self.n), int(self.k)))
        return pd.DataFrame(rows, columns=RATES_COLUMNS)

    def run_rates_report(self, write_csv: bool = False) -> dict | None:
        """
        Monta a tabela de limites e, se pedido, salva o CSV e o manifesto.
        Retorna um dicionário com a tabela e os caminhos gerados, ou None em caso de falha.
        """
        logging.info("--- Iniciando cálculo dos limites de taxa (via Tool) ---")
        table = self.build_rates_table()
        result = {"table": table}
        if not write_csv:
            return result

        output_dir = resolve_output_dir(self.output_cfg, self.output_dir)
        manifest = RunManifest(
            command="rates",
            config={"theta": self.theta, "n": self.n, "k": self.k, "p": self.p, "nu": self.nu},
        )
        try:
            os.makedirs(output_dir, exist_ok=True)
            rates_path = os.path.join(output_dir, self.cfg["output_filename"])
            table.to_csv(rates_path, index=False, float_format=self.cfg.get("float_format", "%.6g"))
            logging.info(f"Arquivo '{rates_path}' salvo com sucesso.")
        except (IOError, OSError) as e:
            logging.error(f"Falha ao salvar a tabela de limites em '{output_dir}': {e}")
            return None

        manifest.output_files["rates_file_path"] = rates_path
        result["rates_file_path"] = rates_path
        result["manifest_file_path"] = save_manifest(manifest, output_dir)
        return result

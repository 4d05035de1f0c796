import os
import json
import logging

from group_testing.decoders import comp_decode
from group_testing.oracle import CompDecoder, EnumerationCaps, InvariantReport, run_invariant_suite
from tools.manifest import RunManifest, save_manifest
from utils.utils import setup_logging, load_config, resolve_output_dir


class OracleCheckerTool:
    """
    Classe responsável por rodar a bateria de invariantes do oráculo e salvar o relatório.
    """

    def __init__(
        self,
        master_seed: int,
        seeds: int | None = None,
        min_n: int | None = None,
        max_n: int | None = None,
        max_k: int | None = None,
        output_dir: str | None = None,
        config_path: str | None = None,
        comp_decoder: CompDecoder = comp_decode,
    ):
        """
        Inicializa o verificador, configura o logging e carrega as configurações.
        """
        setup_logging(config_path)
        try:
            config = load_config(config_path)
            self.cfg = config["oracle_check"]
            self.output_cfg = config["output"]
            self.caps = EnumerationCaps.from_config(config["oracle"])
            self.sss_budget = int(config["decoders"]["sss_node_budget"])
        except (FileNotFoundError, KeyError) as e:
            logging.error(
                f"Falha ao carregar configuração para OracleCheckerTool. Detalhes: {e}"
            )
            raise ValueError("Erro de configuração impede a continuação.") from e

        self.master_seed = master_seed
        self.seeds = int(seeds if seeds is not None else self.cfg["seeds"])
        self.min_n = int(min_n if min_n is not None else self.cfg["min_n"])
        self.max_n = int(max_n if max_n is not None else self.cfg["max_n"])
        self.max_k = int(max_k if max_k is not None else self.cfg["max_k"])
        self.p_values = [float(p) for p in self.cfg["p_values"]]
        self.sandwich_samples = int(self.cfg["sandwich_samples"])
        self.comp_decoder = comp_decoder
        self.output_dir = output_dir
        self.caps.check(self.max_n, None)

    def _save_report(self, report: InvariantReport, output_dir: str) -> str | None:
        """Salva o relatório da bateria em JSON. (Método privado)"""
        filepath = os.path.join(output_dir, self.cfg["output_filename"])
        try:
            os.makedirs(output_dir, exist_ok=True)
            with open(filepath, "w", encoding="utf-8") as f:
                json.dump(report.to_dict(), f, ensure_ascii=False, indent=4)
            logging.info(f"Arquivo '{filepath}' salvo com sucesso.")
            return filepath
        except (IOError, OSError) as e:
            logging.error(f"Falha ao salvar o arquivo '{filepath}': {e}")
            return None

    def run_oracle_check(self) -> dict | None:
        """
        Roda a bateria de invariantes e salva o relatório e o manifesto.
        Retorna um dicionário com o relatório e os caminhos gerados, ou None em caso de falha.
        """
        logging.info("--- Iniciando verificação pelo oráculo (via Tool) ---")
        settings = {
            "seeds": self.seeds,
            "master_seed": self.master_seed,
            "min_n": self.min_n,
            "max_n": self.max_n,
            "max_k": self.max_k,
            "p_values": self.p_values,
            "sandwich_samples": self.sandwich_samples,
        }
        report = run_invariant_suite(
            **settings,
            comp_decoder=self.comp_decoder,
            caps=self.caps,
            sss_budget=self.sss_budget,
        )

        output_dir = resolve_output_dir(self.output_cfg, self.output_dir)
        report_path = self._save_report(report, output_dir)
        if report_path is None:
            return None

        manifest = RunManifest(command="oracle-check", config=settings, master_seed=self.master_seed)
        manifest.output_files["report_file_path"] = report_path

        if report.passed:
            logging.info("=" * 50)
            logging.info(f"SUCESSO: nenhuma violação em {report.instances} instâncias.")
            logging.info("=" * 50)
        else:
            logging.error("=" * 50)
            logging.error("FALHA: invariantes violados.")
            for name, count in report.violations.items():
                if count:
                    logging.error(
                        f"   - {name}: {count} violações; sementes {report.counterexamples[name]}"
                    )
            logging.error("=" * 50)

        return {
            "report": report,
            "report_file_path": report_path,
            "manifest_file_path": save_manifest(manifest, output_dir),
        }

import logging

from tools.rates_reporter import RatesReporterTool
from utils.utils import setup_logging


class RatesReporterAgent:
    """
    Agente que utiliza a RatesReporterTool para calcular os limites de taxa
    e retorna o resultado de forma estruturada.
    """

    def __init__(self, config_path: str | None = None, **params):
        """
        Inicializa o agente e sua ferramenta principal, a RatesReporterTool.
        """
        setup_logging(config_path)
        logging.info("Inicializando o RatesReporterAgent...")
        try:
            self.rates_tool = RatesReporterTool(config_path=config_path, **params)
        except ValueError as e:
            logging.error(f"Erro fatal na inicialização do agente de limites: {e}")
            raise

    def run(self, write_csv: bool = False) -> dict | None:
        """
        Executa o cálculo dos limites através da ferramenta.

        Returns:
            dict: A tabela de limites e, se salvos, os caminhos dos arquivos.
            None: Retorna None se o salvamento falhar.
        """
        logging.info("--- Agente acionado para executar a tarefa de cálculo de limites ---")

        result = self.rates_tool.run_rates_report(write_csv=write_csv)

        if result:
            logging.info("Agente concluiu a tarefa com sucesso.")
            for key, path in result.items():
                if isinstance(path, str):
                    logging.info(f"  - {key}: {path}")
            return result
        else:
            logging.error("Agente falhou ao executar a tarefa de cálculo de limites.")
            return None

import logging

from tools.threshold_estimator import ThresholdEstimatorTool
from utils.utils import setup_logging


class ThresholdEstimatorAgent:
    """
    Agente que utiliza a ThresholdEstimatorTool para localizar o limiar empírico.
    """

    def __init__(self, curve_csv_path: str, n: int, k: int, p: float, config_path: str | None = None):
        setup_logging(config_path)
        logging.info("Inicializando o ThresholdEstimatorAgent...")
        try:
            self.threshold_tool = ThresholdEstimatorTool(
                curve_csv_path, n, k, p, config_path=config_path
            )
        except ValueError as e:
            logging.error(f"Erro fatal na inicialização do agente de limiar: {e}")
            raise

    def run(self) -> dict | None:
        logging.info("--- Agente acionado para executar a tarefa de estimativa de limiar ---")

        result = self.threshold_tool.run_threshold_estimation()

        if result:
            logging.info(
                f"Agente concluiu a tarefa com sucesso. Arquivo em: {result['threshold_file_path']}"
            )
            return result
        else:
            logging.error("Agente falhou ao executar a tarefa de estimativa de limiar.")
            return None

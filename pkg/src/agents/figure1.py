import logging

from tools.figure1 import Figure1Tool
from utils.utils import setup_logging


class Figure1Agent:
    """
    Agente que utiliza a Figure1Tool para gerar as curvas de taxa em função de θ.
    """

    def __init__(self, config_path: str | None = None, **grid):
        setup_logging(config_path)
        logging.info("Inicializando o Figure1Agent...")
        try:
            self.figure1_tool = Figure1Tool(config_path=config_path, **grid)
        except ValueError as e:
            logging.error(f"Erro fatal na inicialização do agente: {e}")
            raise

    def run(self, write_csv: bool = True) -> dict | None:
        logging.info("--- Agente acionado para executar a tarefa de curvas de taxa ---")

        result = self.figure1_tool.run_figure1(write_csv=write_csv)

        if result:
            logging.info(
                f"Agente concluiu a tarefa com sucesso. Arquivo em: {result.get('figure1_file_path', 'N/A')}"
            )
            return result
        else:
            logging.error("Agente falhou ao executar a tarefa de curvas de taxa.")
            return None

import logging

from tools.oracle_checker import OracleCheckerTool
from utils.utils import setup_logging


class OracleCheckerAgent:
    """
    Agente que utiliza a OracleCheckerTool para conferir os decodificadores
    contra a enumeração exaustiva e retorna o resultado de forma estruturada.
    """

    def __init__(self, master_seed: int, config_path: str | None = None, **params):
        """
        Inicializa o agente e sua ferramenta principal, a OracleCheckerTool.
        """
        setup_logging(config_path)
        logging.info("Inicializando o OracleCheckerAgent...")
        try:
            self.oracle_tool = OracleCheckerTool(master_seed, config_path=config_path, **params)
        except ValueError as e:
            logging.error(f"Erro fatal na inicialização do agente do oráculo: {e}")
            raise

    def run(self) -> dict | None:
        """
        Executa a bateria de invariantes através da ferramenta.

        Returns:
            dict: O relatório e os caminhos dos arquivos gerados.
            None: Retorna None se o relatório não puder ser salvo.
        """
        logging.info("--- Agente acionado para executar a verificação pelo oráculo ---")

        result = self.oracle_tool.run_oracle_check()

        if result:
            status = "aprovada" if result["report"].passed else "reprovada"
            logging.info(f"Agente concluiu a tarefa. Bateria {status}.")
            logging.info(f"  - report_file_path: {result['report_file_path']}")
            return result
        else:
            logging.error("Agente falhou ao executar a verificação pelo oráculo.")
            return None

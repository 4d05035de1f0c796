import logging

from tools.simulation import SimulationTool
from utils.utils import setup_logging


class SimulationAgent:
    """
    Agente que utiliza a SimulationTool para rodar a varredura de Monte Carlo
    e retorna o resultado de forma estruturada.
    """

    def __init__(
        self,
        run_config: dict,
        output_dir: str | None = None,
        config_path: str | None = None,
    ):
        """
        Inicializa o agente e sua ferramenta principal, a SimulationTool.
        """
        setup_logging(config_path)
        logging.info("Inicializando o SimulationAgent...")
        try:
            self.simulation_tool = SimulationTool(
                run_config, output_dir=output_dir, config_path=config_path
            )
        except ValueError as e:
            logging.error(f"Erro fatal na inicialização do agente de simulação: {e}")
            raise

    @property
    def experiment(self):
        return self.simulation_tool.experiment

    def run(self) -> dict | None:
        """
        Executa a varredura através da ferramenta e formata a saída.

        Returns:
            dict: Um dicionário com os caminhos para os arquivos da curva.
            None: Retorna None se a simulação falhar.
        """
        logging.info("--- Agente acionado para executar a tarefa de simulação ---")

        result = self.simulation_tool.run_simulation()

        if result:
            logging.info("Agente concluiu a tarefa com sucesso. Arquivos gerados:")
            for key, path in result.items():
                logging.info(f"  - {key}: {path}")
            return result
        else:
            logging.error("Agente falhou ao executar a tarefa de simulação.")
            return None

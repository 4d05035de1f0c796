from utils.utils import setup_logging
from langgraph.graph import StateGraph, END
import logging
from typing import Dict, Optional, TypedDict

from agents.simulation import SimulationAgent
from agents.threshold_estimator import ThresholdEstimatorAgent
from tools.manifest import RunManifest, now_timestamp, save_manifest


class SimulationState(TypedDict):
    run_config: dict
    output_dir: Optional[str]
    config_path: Optional[str]
    experiment_config: Optional[dict]
    config_hash: Optional[str]
    master_seed: Optional[int]
    started_at: Optional[str]
    curve_csv_path: Optional[str]
    curve_json_path: Optional[str]
    threshold_file_path: Optional[str]
    thresholds: Optional[dict]
    manifest_file_path: Optional[str]


class SimulationWorkflow:
    """
    Orquestra uma execução completa de `simulate`.

    Cada nó executa uma etapa (validação da configuração, varredura de Monte
    Carlo, estimativa de limiar e manifesto) e o estado carrega os caminhos
    dos arquivos gerados de um nó para o seguinte.
    """

    def __init__(self, config_path: str | None = None):
        """
        Inicializa o workflow, configurando o logging e construindo o grafo compilado.
        """
        setup_logging(config_path)
        logging.info("Inicializando o SimulationWorkflow.")
        self.config_path = config_path
        self.simulation_agent: SimulationAgent | None = None
        self.graph = self._build_graph()

    def _build_graph(self):
        """
        Constrói o grafo de execução definindo todos os nós e suas conexões (arestas).

        Retorna:
            graph: O grafo compilado e pronto para ser executado.
        """
        workflow = StateGraph(SimulationState)

        logging.info("Adicionando nós ao grafo...")
        workflow.add_node("prepare_config", self._node_prepare_config)
        workflow.add_node("simulation", self._node_simulation)
        workflow.add_node("threshold", self._node_threshold)
        workflow.add_node("manifest", self._node_manifest)

        logging.info("Definindo as arestas do grafo...")
        workflow.set_entry_point("prepare_config")
        workflow.add_edge("prepare_config", "simulation")
        workflow.add_edge("simulation", "threshold")
        workflow.add_edge("threshold", "manifest")
        workflow.add_edge("manifest", END)

        logging.info("Compilando o grafo.")
        return workflow.compile()

    def _node_prepare_config(self, state: Dict) -> Dict:
        """Valida a configuração da execução e calcula o hash canônico."""
        logging.info("Executando nó: PrepareConfig")
        self.simulation_agent = SimulationAgent(
            state["run_config"],
            output_dir=state.get("output_dir"),
            config_path=self.config_path,
        )
        experiment = self.simulation_agent.experiment
        manifest = RunManifest(
            command="simulate",
            config=experiment.to_dict(),
            master_seed=experiment.master_seed,
        )
        state["experiment_config"] = manifest.config
        state["config_hash"] = manifest.config_hash
        state["master_seed"] = experiment.master_seed
        state["started_at"] = manifest.started_at
        state["output_dir"] = self.simulation_agent.simulation_tool.output_dir
        logging.debug(f"Hash da configuração: {state['config_hash']}")
        return state

    def _node_simulation(self, state: Dict) -> Dict:
        """Executa a varredura de Monte Carlo e salva a curva."""
        logging.info("Executando nó: Simulation")
        result = self.simulation_agent.run()
        if result is None:
            raise RuntimeError("A simulação não produziu a curva de sucesso.")
        state["curve_csv_path"] = result["curve_csv_path"]
        state["curve_json_path"] = result["curve_json_path"]
        return state

    def _node_threshold(self, state: Dict) -> Dict:
        """Localiza o limiar empírico a partir do CSV da curva."""
        logging.info("Executando nó: Threshold")
        experiment = self.simulation_agent.experiment
        estimator = ThresholdEstimatorAgent(
            state["curve_csv_path"],
            experiment.n,
            experiment.k,
            experiment.design_p,
            config_path=self.config_path,
        )
        result = estimator.run()
        if result is None:
            raise RuntimeError("Falha ao estimar o limiar da curva.")
        state["threshold_file_path"] = result["threshold_file_path"]
        state["thresholds"] = result["thresholds"]
        return state

    def _node_manifest(self, state: Dict) -> Dict:
        """Registra versão, hash, semente e arquivos gerados."""
        logging.info("Executando nó: Manifest")
        manifest = RunManifest(
            command="simulate",
            config=state["experiment_config"],
            master_seed=state["master_seed"],
            started_at=state["started_at"] or now_timestamp(),
            output_files={
                "curve_csv_path": state["curve_csv_path"],
                "curve_json_path": state["curve_json_path"],
                "threshold_file_path": state["threshold_file_path"],
            },
        )
        manifest_path = save_manifest(manifest, state["output_dir"])
        if manifest_path is None:
            raise RuntimeError("Falha ao salvar o manifesto da execução.")
        state["manifest_file_path"] = manifest_path
        return state

    def run(
        self, run_config: dict, output_dir: str | None = None
    ) -> Dict:
        """
        Executa o fluxo de trabalho completo para uma configuração de execução.

        Retorna:
            Dict: O estado final contendo os caminhos para todos os artefatos gerados.
        """
        logging.info("Iniciando a execução do workflow completo.")
        initial_state = {
            "run_config": run_config,
            "output_dir": output_dir,
            "config_path": self.config_path,
        }
        final_state = self.graph.invoke(initial_state)
        logging.info("Workflow concluído com sucesso.")
        return final_state

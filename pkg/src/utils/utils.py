import os
import json
import yaml
import hashlib
import logging
from pathlib import Path
from dotenv import load_dotenv

PROJECT_ROOT = Path(__file__).resolve().parents[2]
DEFAULT_CONFIG_PATH = PROJECT_ROOT / "conf" / "parameters.yaml"


def setup_logging(config_path: str | Path | None = None):
    """Configura o sistema de logging para salvar em arquivo e mostrar no console."""
    log_directory = "logs"
    log_filename = "logs.log"
    level = logging.INFO
    try:
        log_cfg = load_config(config_path).get("logging", {})
        log_directory = log_cfg.get("log_dir", log_directory)
        log_filename = log_cfg.get("log_filename", log_filename)
        level = getattr(logging, str(log_cfg.get("level", "INFO")).upper(), level)
    except (FileNotFoundError, yaml.YAMLError):
        pass

    log_filepath = os.path.join(log_directory, log_filename)

    os.makedirs(log_directory, exist_ok=True)

    log_format = "%(asctime)s - %(levelname)s - %(message)s"
    date_format = "%Y-%m-%d %H:%M:%S"

    logging.basicConfig(
        level=level,
        format=log_format,
        datefmt=date_format,
        handlers=[
            logging.FileHandler(log_filepath, encoding="utf-8"),
            logging.StreamHandler(),
        ],
        force=True,
    )
    logging.debug("Logger configurado com sucesso.")


def load_config(config_path: str | Path | None = None) -> dict:
    """
    Carrega as configurações de um arquivo YAML.
    """
    config_path = Path(config_path) if config_path else DEFAULT_CONFIG_PATH
    try:
        with open(config_path, "r", encoding="utf-8") as f:
            config = yaml.safe_load(f)
        return config or {}
    except FileNotFoundError:
        logging.error(f"Arquivo de configuração não encontrado em '{config_path}'")
        raise
    except Exception as e:
        logging.exception(f"Falha ao ler ou processar o arquivo de configuração: {e}")
        raise


def resolve_output_dir(output_cfg: dict, override: str | None = None) -> str:
    """
    Define o diretório de saída: argumento explícito, depois a variável de
    ambiente configurada (também lida de um .env), depois o valor do YAML.
    """
    load_dotenv()
    if override:
        return override
    env_value = os.getenv(output_cfg.get("env_var", "BGT_OUTPUT_DIR"))
    if env_value:
        return env_value
    return output_cfg.get("output_dir", "data/results")


def canonicalize_config(config: dict) -> dict:
    """Ordena chaves e normaliza números para que o hash não dependa da escrita."""

    def _normalize(value):
        if isinstance(value, bool) or value is None or isinstance(value, str):
            return value
        if isinstance(value, int):
            return value
        if isinstance(value, float):
            if value.is_integer() and abs(value) < 2**53:
                return int(value)
            return repr(value)
        if isinstance(value, dict):
            return {str(k): _normalize(v) for k, v in sorted(value.items())}
        if isinstance(value, (list, tuple)):
            return [_normalize(v) for v in value]
        return str(value)

    return _normalize(config)


def config_hash(config: dict) -> str:
    """Hash SHA-256 da forma canônica da configuração."""
    canonical = json.dumps(
        canonicalize_config(config), sort_keys=True, separators=(",", ":")
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

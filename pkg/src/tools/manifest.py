import os
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime

from group_testing import __version__
from group_testing.design import PRNG_NAME, PRNG_VERSION
from utils.utils import config_hash

TIMESTAMP_FORMAT = "%Y-%m-%d %H:%M:%S"


def now_timestamp() -> str:
    return datetime.now().strftime(TIMESTAMP_FORMAT)


@dataclass
class RunManifest:
    """
    Registro de uma execução: versão, hash da configuração canônica, semente
    e arquivos gerados. O hash depende só do conteúdo da configuração.
    """

    command: str
    config: dict
    master_seed: int | None = None
    started_at: str = field(default_factory=now_timestamp)
    finished_at: str | None = None
    output_files: dict = field(default_factory=dict)
    tool_version: str = __version__

    @property
    def config_hash(self) -> str:
        return config_hash(self.config)

    def finish(self):
        self.finished_at = now_timestamp()

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "tool_version": self.tool_version,
            "command": self.command,
            "config_hash": self.config_hash,
            "config": self.config,
            "master_seed": self.master_seed,
            "prng": f"{PRNG_NAME}/v{PRNG_VERSION}",
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "output_files": dict(self.output_files),
        }


def save_manifest(manifest: RunManifest, output_dir: str) -> str | None:
    """
    Salva o manifest.json no diretório de saída. Retorna o caminho ou None em caso de falha.
    """
    if manifest.finished_at is None:
        manifest.finish()
    try:
        os.makedirs(output_dir, exist_ok=True)
        manifest_path = os.path.join(output_dir, "manifest.json")
        with open(manifest_path, "w", encoding="utf-8") as f:
            json.dump(manifest.to_dict(), f, ensure_ascii=False, indent=4)
        logging.info(f"Manifesto salvo com sucesso em: {manifest_path}")
        return manifest_path
    except (IOError, OSError) as e:
        logging.error(f"Falha ao salvar o manifesto da execução: {e}")
        return None

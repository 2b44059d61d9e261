from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

from app import __version__
from .io import file_digest, write_json


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    """Паспорт запуска: что запускали, с какими настройками и на каких входных файлах."""
    command: List[str]
    config: Dict[str, Any] = field(default_factory=dict)
    inputs: Dict[str, str] = field(default_factory=dict)   # путь -> sha256
    seed: Optional[int] = None
    version: str = __version__
    started_at: str = field(default_factory=utc_now)
    finished_at: Optional[str] = None
    exit_code: Optional[int] = None

    def add_input(self, path: str | Path):
        self.inputs[str(path)] = file_digest(path)

    def finish(self, exit_code: int):
        self.finished_at = utc_now()
        self.exit_code = exit_code

    def write(self, path: str | Path):
        write_json(path, asdict(self))


def manifest_path(output: str | Path) -> Path:
    output = Path(output)
    return output.with_name(output.name + ".manifest.json")

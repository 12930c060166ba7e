from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Mapping, Sequence

from .. import __version__
from ..utils.files import ensure_parent_dir, file_sha256

logger = logging.getLogger("forced_heteroclinic.pipeline.manifest")


def canonical_json(config: Mapping[str, Any]) -> str:
    return json.dumps(config, sort_keys=True, separators=(",", ":"), ensure_ascii=False, default=str)


def config_hash(config: Mapping[str, Any]) -> str:
    """sha256 over the canonical JSON form of *config*."""

    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    config: Dict[str, Any]
    config_hash: str
    version: str = __version__
    started_at: str = field(default_factory=_now)
    finished_at: str = ""
    files: List[Dict[str, str]] = field(default_factory=list)

    @classmethod
    def start(cls, config: Mapping[str, Any]) -> "RunManifest":
        stored = json.loads(canonical_json(config))
        return cls(config=stored, config_hash=config_hash(stored))

    def finish(self, files: Sequence[Path]) -> "RunManifest":
        self.files = [{"path": str(path), "sha256": file_sha256(path)} for path in files]
        self.finished_at = _now()
        return self

    def verify(self) -> List[str]:
        """Problems found: config re-hash mismatch, missing or changed files."""

        problems = []
        if config_hash(self.config) != self.config_hash:
            problems.append("config hash does not match the stored config")
        for entry in self.files:
            path = Path(entry["path"])
            if not path.exists():
                problems.append(f"missing file {path}")
            elif file_sha256(path) != entry["sha256"]:
                problems.append(f"changed file {path}")
        return problems

    def write(self, path: Path) -> Path:
        path = ensure_parent_dir(Path(path))
        with path.open("w", encoding="utf-8") as handle:
            json.dump(asdict(self), handle, indent=2, ensure_ascii=False)
        logger.info("Run manifest with %s files saved to %s", len(self.files), path)
        return path

    @classmethod
    def read(cls, path: Path) -> "RunManifest":
        with Path(path).open("r", encoding="utf-8") as handle:
            return cls(**json.load(handle))

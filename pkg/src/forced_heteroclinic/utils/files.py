from __future__ import annotations

import hashlib
from datetime import datetime
from pathlib import Path
from typing import Optional

import pandas as pd

CSV_FLOAT_FORMAT = "%.17g"


def timestamped_filename(pattern: str, timestamp: Optional[str] = None) -> str:
    """Return *pattern* formatted with a timestamp placeholder."""

    ts = timestamp or datetime.now().strftime("%Y%m%d_%H%M%S")
    return pattern.format(timestamp=ts)


def ensure_parent_dir(path: Path) -> Path:
    """Create parent directories for *path* and return the path."""

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    """CSV with round-trip float precision and Unix line endings."""

    path = ensure_parent_dir(path)
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, encoding="utf-8", lineterminator="\n")
    return path


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()

"""Run manifests: everything needed to replay a CLI run."""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import platform
from pathlib import Path

import numpy as np
import scipy

from . import __version__

SCHEMA_VERSION = 1


def sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def build(command: str, arguments: dict, engine: dict | None, seed: int | None,
          outputs: list[Path], started: _dt.datetime) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": "cavity-eo",
        "tool_version": __version__,
        "command": command,
        "arguments": arguments,
        "engine": engine,
        "seed": seed,
        "started": started.isoformat(timespec="seconds"),
        "finished": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "environment": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "outputs": {p.name: sha256(p) for p in outputs},
    }


def write(path: str | Path, manifest: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_arguments(path: str | Path) -> dict:
    """Flag values from a plain config object or from a manifest's ``arguments``."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    if "schema_version" in data and isinstance(data.get("arguments"), dict):
        return dict(data["arguments"])
    return data

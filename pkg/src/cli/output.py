# src/cli/output.py - Deterministic CSV/JSON artifacts and the run manifest

import enum
import hashlib
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Sequence

import numpy as np
import pandas as pd

from src import __version__

logger = logging.getLogger(__name__)


def to_jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become None"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    return value


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


class RunWriter:
    """Writes outputs of one command into a directory and records their checksums"""

    def __init__(self, out_dir: Path, float_format: str = "%.17g"):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.float_format = float_format
        self.outputs: List[Path] = []

    def write_csv(self, name: str, rows: Sequence[Dict[str, Any]], columns: Sequence[str]) -> Path:
        frame = pd.DataFrame(list(rows), columns=list(columns))
        return self.write_frame(name, frame)

    def write_frame(self, name: str, frame: pd.DataFrame) -> Path:
        path = self.out_dir / name
        frame.to_csv(path, index=False, float_format=self.float_format, lineterminator="\n")
        self.outputs.append(path)
        logger.info(f"Wrote {len(frame)} rows to {path}")
        return path

    def write_json(self, name: str, payload: Any) -> Path:
        path = self.out_dir / name
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(json.dumps(to_jsonable(payload), sort_keys=True, indent=2))
            f.write("\n")
        self.outputs.append(path)
        return path

    def write_manifest(self, argv: Sequence[str], config: Dict[str, Any], seed: int) -> Path:
        """manifest.json: command line, resolved config, seed, version and output checksums"""
        manifest = {
            "argv": list(argv),
            "config": config,
            "seed": seed,
            "version": __version__,
            "outputs": {p.name: sha256_file(p) for p in sorted(self.outputs)},
        }
        path = self.out_dir / "manifest.json"
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(json.dumps(to_jsonable(manifest), sort_keys=True, indent=2))
            f.write("\n")
        return path


def load_manifest(path: Path) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def verify_manifest(path: Path) -> Dict[str, bool]:
    """Compare recorded checksums against the files next to the manifest"""
    manifest = load_manifest(path)
    base = Path(path).parent
    return {
        name: (base / name).exists() and sha256_file(base / name) == digest
        for name, digest in manifest["outputs"].items()
    }

"""Deterministic data outputs: CSV tables, JSON run manifests, PGM heatmaps.

Every run writes exactly one manifest next to its data files; the manifest
carries the full parameter set, the seed, the package version, and a sha256
hash of the canonicalized configuration so reruns can be verified byte-for-byte.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from . import __version__


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def write_manifest(path: Path, config: dict, seed=None, outputs=()) -> Path:
    path = Path(path)
    doc = {
        "version": __version__,
        "config": config,
        "config_hash": config_hash(config),
        "seed": seed,
        "outputs": [str(Path(p).name) for p in outputs],
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n",
                    encoding="utf-8")
    return path


def write_csv(path: Path, header, rows) -> Path:
    """UTF-8 CSV with a header row; floats rendered with repr (full precision)."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def write_pgm(path: Path, values: np.ndarray, vmax: float = 1.0) -> Path:
    """Binary 8-bit grayscale heatmap of a 2-d array (row 0 at the top)."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise ValueError("heatmap needs a 2-d array")
    pix = np.clip(values / vmax, 0.0, 1.0)
    pix = np.round(pix * 255.0).astype(np.uint8)
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{values.shape[1]} {values.shape[0]}\n255\n".encode("ascii"))
        fh.write(pix.tobytes())
    return path

"""CSV / JSON writers and the run manifest."""

from __future__ import annotations

import csv
import hashlib
import json
import os
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else str(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def write_json(path: Path, data) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(data), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_amplitudes(path: Path, W: np.ndarray, site_of_orbital: np.ndarray) -> Path:
    """Long format: function, orbital, site, Re, Im."""
    def rows():
        for f in range(W.shape[1]):
            col = W[:, f]
            for o in range(W.shape[0]):
                yield f, o, int(site_of_orbital[o]), col[o].real, col[o].imag
    return write_csv(path, ["function", "orbital", "site", "re", "im"], rows())


def write_matrix_csv(path: Path, M: np.ndarray, header_prefix: str = "n") -> Path:
    header = ["m"] + [f"{header_prefix}{j}" for j in range(M.shape[1])]
    return write_csv(path, header, ([i] + list(M[i]) for i in range(M.shape[0])))


def write_manifest(out: Path, config: dict, seeds, tolerances: dict, wall_time: float,
                   files: Sequence[Path], status: str, extra: dict = None) -> Path:
    out = Path(out)
    entries = []
    for f in sorted(set(Path(p) for p in files)):
        entries.append({"path": os.path.relpath(f, out), "sha256": sha256(f),
                        "bytes": f.stat().st_size})
    data = {"package_version": __version__, "config": config, "seeds": seeds,
            "tolerances_achieved": tolerances, "wall_time_seconds": wall_time,
            "status": status, "artifacts": entries}
    if extra:
        data.update(extra)
    return write_json(out / "manifest.json", data)


def verify_manifest(path: Path) -> list:
    """Paths whose checksum no longer matches."""
    path = Path(path)
    data = json.loads(path.read_text(encoding="utf-8"))
    bad = []
    for e in data["artifacts"]:
        f = path.parent / e["path"]
        if not f.exists() or sha256(f) != e["sha256"]:
            bad.append(e["path"])
    return bad

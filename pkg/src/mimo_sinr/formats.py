"""On-disk formats: density-curve CSV/JSON, SINR sample columns, run summaries."""

from __future__ import annotations

import json
import math
from importlib import resources
from pathlib import Path

import numpy as np

from .analytic_pdf import DensityCurve
from .channel_mc import SinrSampleSet
from .config import SystemConfig

CURVE_HEADER = "gamma,density,kind"


def fmt_float(x: float) -> str:
    """17 significant digits: round-trips every IEEE-754 double."""
    return format(float(x), ".17g")


def write_density_csv(curve: DensityCurve, path) -> Path:
    path = Path(path)
    lines = [CURVE_HEADER]
    lines.extend(f"{fmt_float(g)},{fmt_float(v)},{curve.kind}"
                 for g, v in zip(curve.grid, curve.values))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    return path


def read_density_csv(path, config: SystemConfig | None = None) -> DensityCurve:
    rows = Path(path).read_text(encoding="ascii").splitlines()
    if not rows or rows[0].strip() != CURVE_HEADER:
        raise ValueError(f"{path}: expected header {CURVE_HEADER!r}")
    grid, values, kinds = [], [], set()
    for row in rows[1:]:
        if not row.strip():
            continue
        g, v, k = row.split(",")
        grid.append(float(g))
        values.append(float(v))
        kinds.add(k.strip())
    if len(kinds) != 1:
        raise ValueError(f"{path}: mixed curve kinds {sorted(kinds)}")
    return DensityCurve(np.array(grid), np.array(values), kinds.pop(), config)


def curve_to_json(curve: DensityCurve) -> dict:
    return {
        "kind": curve.kind,
        "config": None if curve.config is None else curve.config.to_dict(),
        "gamma": [float(g) for g in curve.grid],
        "density": [float(v) for v in curve.values],
    }


def write_density_json(curve: DensityCurve, path) -> Path:
    path = Path(path)
    path.write_text(dumps(curve_to_json(curve)), encoding="ascii")
    return path


def write_samples(samples: SinrSampleSet, path, binary: bool = False) -> Path:
    """One SINR value per line (17 significant digits), or raw little-endian float64."""
    path = Path(path)
    data = np.asarray(samples.samples, dtype="<f8")
    if binary:
        path.write_bytes(data.tobytes())
    else:
        path.write_text("".join(fmt_float(v) + "\n" for v in data), encoding="ascii")
    return path


def read_samples(path, binary: bool = False) -> np.ndarray:
    path = Path(path)
    if binary:
        return np.frombuffer(path.read_bytes(), dtype="<f8").copy()
    return np.array([float(line) for line in path.read_text(encoding="ascii").split()])


def _clean(obj):
    # NaN/inf are not JSON; undefined quantities become null
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def dumps(obj) -> str:
    """Deterministic JSON; Python's float repr already round-trips."""
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def summary_schema() -> dict:
    text = resources.files("mimo_sinr").joinpath("schema/summary.schema.json").read_text()
    return json.loads(text)

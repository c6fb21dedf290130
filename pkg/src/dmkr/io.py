"""Deterministic CSV/JSON writers for run artifacts.

CSV files are comma-separated, UTF-8 with LF endings; metadata lives in
'#'-prefixed lines before the column header.  Floats are written with
repr() so files round-trip bit-for-bit.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

CSV_SCHEMA_VERSION = 1


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    return str(x)


def write_csv(path, columns, rows, metadata: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# schema_version={CSV_SCHEMA_VERSION}\n")
        for key in sorted(metadata or {}):
            fh.write(f"# {key}={_fmt((metadata or {})[key])}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")
    return path


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


def timeseries_csv(path, series, metadata: dict | None = None) -> Path:
    meta = dict(series.metadata)
    meta.update(metadata or {})
    rows = zip(series.times.tolist(), series.values.tolist())
    return write_csv(path, ("t", "value"), rows, meta)


def spectrum_csv(path, spec, metadata: dict | None = None) -> Path:
    meta = {"method": spec.method, "n_requested": spec.n_requested}
    meta.update(spec.metadata)
    meta.update(metadata or {})
    rows = ((v.real, v.imag, abs(v)) for v in spec.eigenvalues)
    return write_csv(path, ("re", "im", "modulus"), rows, meta)


def husimi_csv(path, hmap, metadata: dict | None = None) -> Path:
    rows = (
        (q, p, hmap.values[i, j])
        for i, p in enumerate(hmap.p_centers.tolist())
        for j, q in enumerate(hmap.q_centers.tolist())
    )
    meta = {"normalization": hmap.normalization}
    meta.update(metadata or {})
    return write_csv(path, ("q", "p", "value"), rows, meta)


def bifurcation_csv(path, result, metadata: dict | None = None) -> Path:
    meta = {"t_transient": result.t_transient, "t_record": result.t_record,
            "n_ics": result.n_ics}
    meta.update(metadata or {})
    rows = zip(result.K.tolist(), result.p.tolist())
    return write_csv(path, ("K", "p"), rows, meta)


def density_csv(path, grid, density, metadata: dict | None = None) -> Path:
    qc, pc = grid.cell_centers()
    rows = zip(qc.tolist(), pc.tolist(), np.asarray(density).tolist())
    return write_csv(path, ("q_cell_center", "p_cell_center", "mass"),
                     rows, metadata)


def sweep_csv(path, rows, metadata: dict | None = None) -> Path:
    from .analysis import ComparisonRow

    cols = ComparisonRow.COLUMNS
    data = ([getattr(r, c) for c in cols] for r in rows)
    return write_csv(path, cols, data, metadata)

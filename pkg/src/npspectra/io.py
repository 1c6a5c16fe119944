"""CSV/JSON writers for curves, matrices, spectra and scan tables."""

import csv
import json
import pathlib

import numpy as np

__all__ = [
    "to_jsonable",
    "write_json",
    "write_rows",
    "write_columns",
    "export_curve",
    "dump_operator",
    "load_operator_matrix",
    "export_spectrum",
    "export_symbol_trace",
]


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and dataclass-like rows to plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    return obj


def write_json(path, data):
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_jsonable(data), indent=2) + "\n")
    return path


def _flat(row):
    out = {}
    for k, v in to_jsonable(row).items():
        out[k] = json.dumps(v) if isinstance(v, (list, dict)) else v
    return out


def write_rows(path, rows):
    """Write a list of dicts as CSV; column order follows the first row."""
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = [_flat(r) for r in rows]
    with path.open("w", newline="") as fh:
        if not rows:
            return path
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    return path


def write_columns(path, columns, comment=None):
    """Whitespace-separated numeric columns with a ``#`` header, as gnuplot reads them.

    ``columns`` maps a column name to a 1-D sequence; booleans become 0/1.
    """
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    data = np.column_stack([np.asarray(columns[k], dtype=float) for k in names])
    header = ("" if comment is None else comment + "\n") + " ".join(names)
    np.savetxt(path, data, header=header, fmt="%.17g")
    return path


def export_curve(curve, path, npts=2001):
    """Sample ``curve`` on a uniform grid; ``.json`` writes metadata and samples, anything else CSV."""
    path = pathlib.Path(path)
    t = np.linspace(0.0, 1.0, npts)
    v = curve.evaluate(t)
    cols = {"t": t, "g1": v[0], "g2": v[1], "dg1": v[2], "dg2": v[3]}
    if path.suffix == ".json":
        return write_json(path, {"metadata": curve.metadata(), "samples": cols})
    rows = [dict(zip(cols, vals)) for vals in zip(*cols.values())]
    return write_rows(path, rows)


def dump_operator(op, stem):
    """Save ``A``, ``S`` and ``P`` of a modal operator as ``.npy`` files plus a JSON sidecar.

    Returns the sidecar path ``<stem>.json``.
    """
    stem = pathlib.Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    files = {}
    for name in ("A", "S", "P"):
        p = stem.with_name(f"{stem.name}_{name}.npy")
        np.save(p, getattr(op, name))
        files[name] = p.name
    np.save(stem.with_name(f"{stem.name}_nodes.npy"), op.grid.nodes)
    files["nodes"] = f"{stem.name}_nodes.npy"
    meta = dict(op.metadata())
    meta["files"] = files
    return write_json(stem.with_suffix(".json"), meta)


def load_operator_matrix(sidecar, name="A"):
    sidecar = pathlib.Path(sidecar)
    meta = json.loads(sidecar.read_text())
    return np.load(sidecar.with_name(meta["files"][name]))


def export_spectrum(report, path):
    """``.json`` for the full report, otherwise a CSV of index/eigenvalue/discrete flag."""
    path = pathlib.Path(path)
    if path.suffix == ".json":
        return write_json(path, report.to_dict())
    disc = set(report.discrete)
    rows = [{"index": i, "eigenvalue": float(x), "discrete": float(x) in disc}
            for i, x in enumerate(report.eigenvalues)]
    return write_rows(path, rows)


def export_symbol_trace(trace, path):
    rows = [{"xi": x, "re": re, "im": im, "abs": abs(complex(re, im))} for x, re, im in trace.rows()]
    return write_rows(path, rows)

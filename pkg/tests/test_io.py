import csv
import json

import numpy as np

from npspectra import io
from npspectra.cone import symbol_trace
from npspectra.discretize import assemble, build_grid
from npspectra.spectra import energy_spectrum


def test_jsonable_converts_numpy():
    out = io.to_jsonable({"a": np.arange(3), "b": np.float64(0.5), "c": np.bool_(True), 1: (np.int64(2),)})
    assert json.loads(json.dumps(out)) == {"a": [0, 1, 2], "b": 0.5, "c": True, "1": [2]}


def test_rows_and_columns(tmp_path):
    io.write_rows(tmp_path / "r.csv", [{"x": 1, "v": [1, 2]}, {"x": 2, "v": []}])
    with (tmp_path / "r.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert rows[0]["x"] == "1" and json.loads(rows[0]["v"]) == [1, 2]
    io.write_columns(tmp_path / "c.dat", {"n": [1, 2], "ok": [True, False]}, comment="demo")
    assert np.array_equal(np.loadtxt(tmp_path / "c.dat"), [[1, 1], [2, 0]])


def test_curve_export(tmp_path, perturbed):
    io.export_curve(perturbed, tmp_path / "c.json", npts=11)
    data = json.loads((tmp_path / "c.json").read_text())
    assert len(data["samples"]["t"]) == 11 and "alpha" in json.dumps(data["metadata"])
    io.export_curve(perturbed, tmp_path / "c.csv", npts=11)
    assert len((tmp_path / "c.csv").read_text().splitlines()) == 12


def test_operator_dump_round_trip(tmp_path, sphere):
    op = assemble(2, sphere, build_grid(sphere, 32))
    side = io.dump_operator(op, tmp_path / "op")
    for name in ("A", "S", "P", "nodes"):
        ref = op.grid.nodes if name == "nodes" else getattr(op, name)
        assert np.array_equal(io.load_operator_matrix(side, name), ref)


def test_spectrum_and_symbol_exports(tmp_path, sphere):
    rep = energy_spectrum(assemble(0, sphere, build_grid(sphere, 32)))
    rep.discrete = [float(rep.eigenvalues[0])]
    io.export_spectrum(rep, tmp_path / "s.json")
    io.export_spectrum(rep, tmp_path / "s.csv")
    assert json.loads((tmp_path / "s.json").read_text())["n"] == 0
    with (tmp_path / "s.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert rows[0]["discrete"] == "True" and rows[1]["discrete"] == "False"
    io.export_symbol_trace(symbol_trace(1, 1.4, xi_max=2.0, step=0.5), tmp_path / "t.csv")
    assert (tmp_path / "t.csv").read_text().startswith("xi,re,im,abs")

"""Command-line entry point: ``npspectra <subcommand> [options]``.

Every subcommand prints a short summary, writes CSV/JSON into ``--output-dir``
when given, and exits with status 0 exactly when its checks pass.
"""

import argparse
import dataclasses
import math
import pathlib
import sys

import numpy as np

from . import io
from .cone import essential_interval, symbol_trace
from .discretize import AssemblyError, assemble, build_grid
from .experiments import (ExperimentConfig, run_decay_scan, run_embedded_scan,
                          run_envelope_suite, run_sphere_validation)
from .geometry import ConstructionError, build_perturbed_curve, build_sphere_curve, check_constraints
from .specfun import DomainError
from .spectra import detect_discrete, energy_spectrum


def _config(args):
    cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    updates = {}
    if getattr(args, "alpha", None) is not None:
        updates["alpha"] = args.alpha
    if getattr(args, "nmax", None) is not None:
        updates["n_range"] = list(range(0, args.nmax + 1))
    if args.output_dir is not None:
        updates["output_dir"] = str(args.output_dir)
    return dataclasses.replace(cfg, **updates)


def _curve(alpha):
    if alpha is None or alpha == math.pi / 2:
        return build_sphere_curve()
    return build_perturbed_curve(alpha)


def _plot(args, name, columns, comment=None):
    if not args.plot_data:
        return
    base = pathlib.Path(args.output_dir or ".")
    path = io.write_columns(base / f"{name}.dat", columns, comment)
    print(f"plot data: {path}")


def _status(ok):
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def cmd_sphere_validate(args):
    report = run_sphere_validation(_config(args))
    for r in report["rows"]:
        print(f"n={r['n']:2d}  top6 err {r['top_error']:.2e}  |A-S/2|/|S| {r['kernel_identity']:.2e}"
              f"  1-cos {r['eigenvector_defect']:.2e}  {'ok' if r['passed'] else 'FAILED'}")
    print(f"Gauss identity max error {report['gauss_max_error']:.2e}")
    _plot(args, "sphere_validation", {
        "n": [r["n"] for r in report["rows"]],
        "top_error": [r["top_error"] for r in report["rows"]],
        "kernel_identity": [r["kernel_identity"] for r in report["rows"]],
    })
    return _status(report["passed"])


def cmd_build_curve(args):
    curve = _curve(args.alpha)
    report = check_constraints(curve)
    for c in report.items:
        print(f"{'ok  ' if c.passed else 'FAIL'} {c.name}: {c.measured:.6g} (bound {c.bound:.6g}) {c.note}")
    if args.export:
        path = io.export_curve(curve, args.export)
        io.write_json(pathlib.Path(path).with_suffix(".constraints.json"), report.to_dict())
        print(f"curve written to {path}")
    if args.plot_data:
        t = np.linspace(0.0, 1.0, 2001)
        v = curve.evaluate(t)
        _plot(args, "curve", {"t": t, "g1": v[0], "g2": v[1]})
    return _status(report.passed)


def cmd_modal_spectrum(args):
    cfg = _config(args)
    curve = _curve(args.alpha)
    levels = cfg.vertex_levels if curve.kind == "perturbed" else None
    grid = build_grid(curve, args.nodes, cfg.grading, order=cfg.order, vertex_levels=levels)
    fine = build_grid(curve, 2 * args.nodes, cfg.grading, order=cfg.order, vertex_levels=levels)
    interval = None
    if curve.kind == "perturbed":
        interval = essential_interval(args.n, curve.alpha, xi_max=cfg.xi_max, step=cfg.xi_step).as_tuple()
    op = assemble(args.n, curve, grid)
    rep = energy_spectrum(op, essential_interval=interval)
    ref = energy_spectrum(assemble(args.n, curve, fine), essential_interval=interval)
    detect_discrete(rep, ref, interval, cfg.tolerances["stability"])
    print(f"mode n={args.n}, N={grid.size}, essential interval {interval}")
    print("top eigenvalues:", " ".join(f"{x:.12g}" for x in rep.top(8)))
    print("stable discrete:", " ".join(f"{x:.12g}" for x in rep.discrete[:8]))
    print("diagnostics:", {k: f"{v:.3e}" for k, v in rep.diagnostics.items()})
    if cfg.output_dir:
        out = pathlib.Path(cfg.output_dir)
        io.export_spectrum(rep, out / f"spectrum_n{args.n}_N{grid.size}.json")
        io.export_spectrum(rep, out / f"spectrum_n{args.n}_N{grid.size}.csv")
        io.dump_operator(op, out / f"operator_n{args.n}_N{grid.size}")
    _plot(args, "spectrum", {"index": np.arange(rep.eigenvalues.size), "eigenvalue": rep.eigenvalues})
    return _status(bool(np.all(np.isfinite(rep.eigenvalues))))


def cmd_essential(args):
    cfg = _config(args)
    trace = symbol_trace(args.n, args.alpha, args.line, xi_max=cfg.xi_max, step=cfg.xi_step)
    iv = essential_interval(args.n, args.alpha, xi_max=cfg.xi_max, step=cfg.xi_step)
    print(f"n={args.n} alpha={args.alpha:.12g} line={args.line}: radius {trace.radius:.12g} "
          f"at xi={trace.argmax:.6g}")
    print(f"energy-space essential interval [{iv.lo:.12g}, {iv.hi:.12g}]")
    ok = bool(np.all(np.isfinite(trace.values)))
    if args.line == "energy":
        print(f"max |Im|/max(1,|Re|) = {trace.max_imag_ratio:.2e}")
        ok = ok and trace.max_imag_ratio <= 1e-8
    if cfg.output_dir:
        out = pathlib.Path(cfg.output_dir)
        io.export_symbol_trace(trace, out / f"symbol_n{args.n}_{args.line}.csv")
        io.write_json(out / f"essential_n{args.n}_{args.line}.json",
                      {"n": args.n, "alpha": args.alpha, "line": args.line, "radius": trace.radius,
                       "argmax": trace.argmax, "interval": iv.as_tuple(),
                       "diagnostics": trace.diagnostics})
    _plot(args, f"symbol_n{args.n}_{args.line}",
          {"xi": trace.xi, "re": trace.values.real, "im": trace.values.imag})
    return _status(ok)


def cmd_embedded_scan(args):
    rows, summary = run_embedded_scan(_config(args))
    for r in rows:
        print(f"n={r.n:3d}  lambda {r.lambda_n:.10f}  z {r.z_n:.10f}  sigma_n {r.sigma_n:.3e}"
              f"  dz {r.stability_delta:.1e}  {'EMBEDDED' if r.embedded else ''} {r.flagged}")
    print({k: v for k, v in summary.items()})
    _plot(args, "embedded_scan", {
        "n": [r.n for r in rows], "lambda_n": [r.lambda_n for r in rows], "z_n": [r.z_n for r in rows],
        "sigma_n": [r.sigma_n for r in rows], "sigma_0": [r.sigma_0 for r in rows],
        "embedded": [r.embedded for r in rows],
    })
    return _status(summary["passed"])


def cmd_decay_scan(args):
    rows, summary = run_decay_scan(_config(args))
    for r in rows:
        print(f"n={r['n']:3d}  |dK| {r['k_difference']:.4e}  |dS| {r['s_difference']:.4e}"
              f"  residual {r['residual']:.3e}")
    print(f"slopes: K {summary['slope_k']:.3f}  S {summary['slope_s']:.3f}"
          f"  residual {summary['slope_residual']:.3f}")
    _plot(args, "decay_scan", {k: [r[k] for r in rows] for k in rows[0]})
    return _status(summary["passed"])


def cmd_envelope_suite(args):
    rows, constants = run_envelope_suite(_config(args))
    for k in ("far", "mid", "near"):
        print(f"{k:5s} sup ratio {constants[k]:.12g}")
    for regime in ("far", "mid", "near"):
        sel = [r for r in rows if r["regime"] == regime]
        _plot(args, f"envelope_{regime}", {"n": [r["n"] for r in sel],
                                           "sup_ratio": [r["sup_ratio"] for r in sel],
                                           "argmax_delta": [r["argmax_delta"] for r in sel]})
    return _status(constants["passed"])


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON or TOML file with ExperimentConfig fields")
    common.add_argument("--output-dir", type=pathlib.Path, help="directory for CSV/JSON outputs")
    common.add_argument("--plot-data", action="store_true", help="also write gnuplot-ready .dat columns")

    parser = argparse.ArgumentParser(prog="npspectra", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sphere-validate", parents=[common], help="sphere spectra and identities")
    p.set_defaults(func=cmd_sphere_validate)

    p = sub.add_parser("build-curve", parents=[common], help="build and check a generating curve")
    p.add_argument("--alpha", type=float, help="vertex angle; omit for the sphere")
    p.add_argument("--export", help="write samples to PATH (.csv or .json)")
    p.set_defaults(func=cmd_build_curve)

    p = sub.add_parser("modal-spectrum", parents=[common], help="eigenvalues of one mode")
    p.add_argument("--alpha", type=float, help="vertex angle; omit for the sphere")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--nodes", type=int, default=256)
    p.set_defaults(func=cmd_modal_spectrum)

    p = sub.add_parser("essential", parents=[common], help="essential radius from the cone symbol")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--line", choices=("energy", "l2"), default="energy")
    p.set_defaults(func=cmd_essential)

    p = sub.add_parser("embedded-scan", parents=[common], help="embedded-eigenvalue scan")
    p.add_argument("--alpha", type=float)
    p.add_argument("--nmax", type=int)
    p.set_defaults(func=cmd_embedded_scan)

    p = sub.add_parser("decay-scan", parents=[common], help="operator-difference decay in n")
    p.add_argument("--alpha", type=float)
    p.set_defaults(func=cmd_decay_scan)

    p = sub.add_parser("envelope-suite", parents=[common], help="Legendre envelope ratios")
    p.set_defaults(func=cmd_envelope_suite)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, ConstructionError, AssemblyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

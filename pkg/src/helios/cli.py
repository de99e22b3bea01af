"""Command-line entry point: run orchestration and persistence.

Subcommands
-----------
simulate <config.toml>          run the interface evolution, write a run directory
dtn <curve.csv> <g.csv>         evaluate the Dirichlet-to-Neumann operator
verify <run_dir>                invariant suite + pressure field for a finished run
sweep <config.toml> --eps ...   vanishing-viscosity sweep
pressure <curve.csv>            pressure reconstruction for a single curve
symmetry <curve.csv>            scale/rotation symmetry margins

Exit codes: 0 success, 1 configuration or input error, 2 blow-up,
3 verification failure.

All CSV output uses %.17g formatting so identical inputs reproduce
byte-identical files. No timestamps are written anywhere for the same
reason.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

import numpy as np

from .curve import curve_from_eta, format_float, read_curve_csv, write_curve_csv
from .diagnostics import corner_initial_condition, invariant_suite, reconstruct_pressure
from .dtn import apply_dtn, dtn_oracle_collocation
from .errors import BlowUpError, ConfigError, HeliosError
from .evolution import EvolutionConfig, EvolutionRun, simulate, vanishing_viscosity_sweep
from .grid import PeriodicGrid
from .kernels import assemble

TRACE_COLUMNS = ("t", "min_h", "max_h", "lipschitz", "area", "taylor_max")


# ---------------------------------------------------------------------------
# configuration files


def _require_keys(section: dict, allowed: set, where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in [{where}]: {', '.join(sorted(unknown))}")


def _fourier_eta(grid: PeriodicGrid, section: dict) -> np.ndarray:
    eta = np.zeros(grid.n_points)
    for table, basis in (("cos_k", np.cos), ("sin_k", np.sin)):
        entries = section.get(table, {})
        if not isinstance(entries, dict):
            raise ConfigError(f"[initial.{table}] must be a table of mode = coefficient")
        for key, coeff in entries.items():
            try:
                k = int(key)
            except ValueError:
                raise ConfigError(f"[initial.{table}] key {key!r} is not an integer mode")
            if k < 0 or k >= grid.n_points // 2:
                raise ConfigError(f"[initial.{table}] mode {k} outside [0, N/2)")
            if k == 0 and basis is np.sin:
                raise ConfigError("[initial.sin_k] mode 0 has no effect")
            eta += float(coeff) * basis(k * grid.nodes)
    return eta


def load_config(path: str):
    """Parse and validate a run configuration; returns (EvolutionConfig, eta0, output)."""
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}")

    _require_keys(raw, {"grid", "initial", "evolution", "output"}, "top level")
    for name in ("grid", "initial", "evolution", "output"):
        if name not in raw:
            raise ConfigError(f"missing [{name}] section")

    grid_sec = raw["grid"]
    _require_keys(grid_sec, {"n_points"}, "grid")
    if "n_points" not in grid_sec:
        raise ConfigError("[grid] needs n_points")
    n_points = int(grid_sec["n_points"])

    evo = raw["evolution"]
    _require_keys(evo, {"epsilon", "dt", "t_end", "save_every", "cfl_safety"}, "evolution")
    try:
        config = EvolutionConfig(
            epsilon=float(evo.get("epsilon", 0.0)),
            dt=evo.get("dt", "auto"),
            t_end=float(evo["t_end"]),
            n_points=n_points,
            save_every=int(evo.get("save_every", 1)),
            cfl_safety=float(evo.get("cfl_safety", 0.5)),
        )
    except KeyError as exc:
        raise ConfigError(f"[evolution] missing key {exc}")
    except HeliosError as exc:
        raise ConfigError(f"[evolution]: {exc}")

    grid = PeriodicGrid(n_points)
    initial = raw["initial"]
    kind = initial.get("kind")
    if kind == "fourier":
        _require_keys(initial, {"kind", "cos_k", "sin_k"}, "initial")
        eta0 = _fourier_eta(grid, initial)
    elif kind == "file":
        _require_keys(initial, {"kind", "path"}, "initial")
        if "path" not in initial:
            raise ConfigError("[initial] kind = 'file' needs a path")
        curve = read_curve_csv(initial["path"])
        if curve.n_points != n_points:
            raise ConfigError(
                f"curve file has {curve.n_points} nodes but [grid] says {n_points}"
            )
        eta0 = np.asarray(curve.eta)
    elif kind == "corner":
        _require_keys(
            initial, {"kind", "opening_angle", "bump_width", "mollify_eps"}, "initial"
        )
        try:
            eta0, _ = corner_initial_condition(
                grid,
                float(initial["opening_angle"]),
                float(initial.get("bump_width", 1.2)),
                float(initial.get("mollify_eps", 1e-3)),
            )
        except KeyError as exc:
            raise ConfigError(f"[initial] missing key {exc}")
        except HeliosError as exc:
            raise ConfigError(f"[initial]: {exc}")
    else:
        raise ConfigError("[initial] kind must be one of: fourier, file, corner")

    out = raw["output"]
    _require_keys(out, {"directory", "formats"}, "output")
    if "directory" not in out:
        raise ConfigError("[output] needs a directory")
    formats = out.get("formats", ["csv"])
    if not set(formats) <= {"csv"}:
        raise ConfigError(f"[output] unsupported formats: {formats}")

    return config, eta0, str(out["directory"])


# ---------------------------------------------------------------------------
# persistence


def _write_csv(path, header: str, columns) -> None:
    rows = zip(*columns)
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(format_float(v) for v in row) + "\n")


def write_run_dir(run: EvolutionRun, directory: str) -> None:
    os.makedirs(os.path.join(directory, "snapshots"), exist_ok=True)
    _write_csv(
        os.path.join(directory, "trace.csv"),
        ",".join(TRACE_COLUMNS),
        [run.trace[c] for c in TRACE_COLUMNS],
    )
    grid = PeriodicGrid(run.config.n_points)
    for idx, eta in enumerate(run.snapshots):
        write_curve_csv(
            os.path.join(directory, "snapshots", f"t_{idx:06d}.csv"),
            curve_from_eta(grid, eta),
        )
    payload = {
        "config": {
            "epsilon": run.config.epsilon,
            "dt": run.config.dt,
            "t_end": run.config.t_end,
            "n_points": run.config.n_points,
            "save_every": run.config.save_every,
            "cfl_safety": run.config.cfl_safety,
        },
        "snapshot_times": [float(t) for t in run.times],
        "summary": {
            "n_steps": int(run.trace["t"].size - 1),
            "t_final": float(run.trace["t"][-1]),
            "final_min_h": float(run.trace["min_h"][-1]),
            "final_max_h": float(run.trace["max_h"][-1]),
            "final_lipschitz": float(run.trace["lipschitz"][-1]),
            "final_area": float(run.trace["area"][-1]),
            "blow_up": False,
        },
    }
    with open(os.path.join(directory, "run.json"), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_run_dir(directory: str) -> EvolutionRun:
    try:
        with open(os.path.join(directory, "run.json")) as fh:
            payload = json.load(fh)
        cfg = payload["config"]
        config = EvolutionConfig(
            epsilon=cfg["epsilon"],
            dt=cfg["dt"],
            t_end=cfg["t_end"],
            n_points=cfg["n_points"],
            save_every=cfg["save_every"],
            cfl_safety=cfg["cfl_safety"],
        )
        with open(os.path.join(directory, "trace.csv")) as fh:
            header = fh.readline().strip().split(",")
            if tuple(header) != TRACE_COLUMNS:
                raise ConfigError(f"unexpected trace.csv columns: {header}")
            data = np.array(
                [[float(v) for v in line.split(",")] for line in fh if line.strip()]
            )
        trace = {c: data[:, i] for i, c in enumerate(TRACE_COLUMNS)}
        snapdir = os.path.join(directory, "snapshots")
        snapshots = []
        for name in sorted(os.listdir(snapdir)):
            snapshots.append(np.asarray(read_curve_csv(os.path.join(snapdir, name)).eta))
        times = np.asarray(payload["snapshot_times"], dtype=float)
    except OSError as exc:
        raise ConfigError(f"cannot read run directory {directory}: {exc}")
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"run directory {directory} is malformed: {exc!r}")
    if times.size != len(snapshots):
        raise ConfigError("snapshot_times and snapshots/ disagree in length")
    return EvolutionRun(config=config, times=times, snapshots=snapshots, trace=trace)


GNUPLOT_SCRIPT = """\
set datafile separator ','
set key autotitle columnhead
set terminal pngcairo size 900,600

set output 'trace.png'
set xlabel 't'
plot 'trace.csv' using 1:2 with lines, \\
     'trace.csv' using 1:3 with lines, \\
     'trace.csv' using 1:4 with lines

set output 'interface.png'
set size ratio -1
set xlabel 'x'
set ylabel 'y'
plot 'snapshots/{first}' using (exp($2)*cos($1)):(exp($2)*sin($1)) with lines, \\
     'snapshots/{last}' using (exp($2)*cos($1)):(exp($2)*sin($1)) with lines
"""


# ---------------------------------------------------------------------------
# subcommands


def _cmd_simulate(args) -> int:
    config, eta0, out_dir = load_config(args.config)
    try:
        run = simulate(config, eta0)
    except BlowUpError as exc:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "run.json"), "w") as fh:
            json.dump(
                {
                    "summary": {
                        "blow_up": True,
                        "node": exc.node,
                        "time": exc.time,
                        "message": str(exc),
                    }
                },
                fh,
                indent=2,
                sort_keys=True,
            )
            fh.write("\n")
        print(f"blow-up at t = {exc.time:.6g}, node {exc.node}", file=sys.stderr)
        return 2
    write_run_dir(run, out_dir)
    if args.emit_gnuplot:
        n = len(run.snapshots)
        script = GNUPLOT_SCRIPT.format(first="t_000000.csv", last=f"t_{n - 1:06d}.csv")
        with open(os.path.join(out_dir, "plot.gp"), "w") as fh:
            fh.write(script)
    print(f"run written to {out_dir}")
    return 0


def _read_data_csv(path, expected_header: str) -> tuple:
    with open(path) as fh:
        header = fh.readline().strip()
        if header != expected_header:
            raise ConfigError(f"{path}: expected header {expected_header!r}, got {header!r}")
        data = np.array([[float(v) for v in line.split(",")] for line in fh if line.strip()])
    return data[:, 0], data[:, 1]


def _cmd_dtn(args) -> int:
    curve = read_curve_csv(args.curve)
    alpha, g = _read_data_csv(args.data, "alpha,g")
    if alpha.size != curve.n_points or np.max(np.abs(alpha - curve.grid.nodes)) > 1e-12:
        raise ConfigError("boundary-data nodes do not match the curve nodes")
    result = apply_dtn(assemble(curve), g)
    columns = [curve.grid.nodes, result.theta, result.g_of]
    header = "alpha,theta,G"
    if args.oracle:
        header += ",G_oracle"
        modes = args.oracle_modes
        if modes is None:
            modes = min(32, curve.n_points // 2 - 1)
        columns.append(dtn_oracle_collocation(curve, g, n_modes=modes))
    _write_csv(args.output, header, columns)
    print(f"dtn output written to {args.output}")
    return 0


def _cmd_verify(args) -> int:
    run = read_run_dir(args.run_dir)
    report = invariant_suite(run)
    with open(os.path.join(args.run_dir, "report.json"), "w") as fh:
        fh.write(report.to_json())
        fh.write("\n")

    grid = PeriodicGrid(run.config.n_points)
    final = curve_from_eta(grid, run.final_eta)
    r_min = min(0.1, float(np.min(final.h)) / 8.0)
    field = reconstruct_pressure(final, n_r=12, n_theta=64, r_min=r_min)
    rr = field.r.ravel()
    tt = np.broadcast_to(field.theta, field.r.shape).ravel()
    _write_csv(
        os.path.join(args.run_dir, "pressure.csv"),
        "r,theta,phi,p",
        [rr, tt, field.phi.ravel(), field.p.ravel()],
    )
    for check in report.checks:
        status = "pass" if check.passed else "FAIL"
        print(f"{status} {check.name}: value {check.value:.3e}, tolerance {check.tolerance:.0e}")
    print(f"pressure: boundary misfit {field.boundary_misfit:.3e}")
    if not report.all_passed:
        return 3
    if field.boundary_misfit > 1e-5:
        print("pressure accuracy warning", file=sys.stderr)
    return 0


def _cmd_sweep(args) -> int:
    config, eta0, out_dir = load_config(args.config)
    try:
        levels = [float(v) for v in args.eps.split(",")]
    except ValueError:
        raise ConfigError(f"--eps expects a comma-separated list, got {args.eps!r}")
    try:
        report = vanishing_viscosity_sweep(config, eta0, levels)
    except HeliosError as exc:
        raise ConfigError(str(exc))
    os.makedirs(out_dir, exist_ok=True)
    _write_csv(
        os.path.join(out_dir, "sweep.csv"),
        "eps,l2_gap_to_next",
        [report.eps_levels[:-1], report.l2_gaps],
    )
    for eps, gap in zip(report.eps_levels[:-1], report.l2_gaps):
        print(f"eps {eps:.3e}: gap to next {gap:.6e}")
    print(f"sweep written to {os.path.join(out_dir, 'sweep.csv')}")
    return 0


def _cmd_pressure(args) -> int:
    curve = read_curve_csv(args.curve)
    r_min = args.rmin if args.rmin is not None else min(0.1, float(np.min(curve.h)) / 8.0)
    field = reconstruct_pressure(curve, n_r=args.nr, n_theta=args.ntheta, r_min=r_min)
    rr = field.r.ravel()
    tt = np.broadcast_to(field.theta, field.r.shape).ravel()
    _write_csv(args.output, "r,theta,phi,p", [rr, tt, field.phi.ravel(), field.p.ravel()])
    print(f"boundary misfit {field.boundary_misfit:.3e}")
    if field.accuracy_warning:
        print("pressure accuracy warning", file=sys.stderr)
    print(f"pressure written to {args.output}")
    return 0


def _cmd_symmetry(args) -> int:
    curve = read_curve_csv(args.curve)
    grid = curve.grid
    eta = np.asarray(curve.eta)
    base = assemble(curve)
    base_dtn = apply_dtn(base, eta)

    scale_margin = 0.0
    dtn_scale_margin = 0.0
    for c0 in (-1.0, 0.37, 2.0):
        shifted = assemble(curve_from_eta(grid, eta + c0))
        scale_margin = max(
            scale_margin,
            float(np.max(np.abs(base.kstar - shifted.kstar))),
            float(np.max(np.abs(base.lambda_reg - shifted.lambda_reg))),
        )
        dtn_scale_margin = max(
            dtn_scale_margin,
            float(np.max(np.abs(apply_dtn(shifted, eta + c0).g_of - base_dtn.g_of))),
        )

    s = grid.n_points // 4
    rot = assemble(curve_from_eta(grid, np.roll(eta, s)))
    perm = np.roll(np.roll(base.kstar, s, axis=0), s, axis=1)
    rot_margin = float(np.max(np.abs(rot.kstar - perm)))
    rot_dtn = apply_dtn(rot, np.roll(eta, s))
    rot_dtn_margin = float(np.max(np.abs(rot_dtn.g_of - np.roll(base_dtn.g_of, s))))

    print(f"matrix scale invariance margin:   {scale_margin:.3e}")
    print(f"matrix rotation equivariance:     {rot_margin:.3e}")
    print(f"dtn scaling symmetry margin:      {dtn_scale_margin:.3e}")
    print(f"dtn rotation symmetry margin:     {rot_dtn_margin:.3e}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="helios", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the interface evolution")
    p.add_argument("config")
    p.add_argument("--emit-gnuplot", action="store_true")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("dtn", help="evaluate the Dirichlet-to-Neumann operator")
    p.add_argument("curve")
    p.add_argument("data")
    p.add_argument("--oracle", action="store_true")
    p.add_argument("--oracle-modes", type=int, default=None)
    p.add_argument("-o", "--output", default="dtn.csv")
    p.set_defaults(func=_cmd_dtn)

    p = sub.add_parser("verify", help="invariant suite over a run directory")
    p.add_argument("run_dir")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("sweep", help="vanishing-viscosity sweep")
    p.add_argument("config")
    p.add_argument("--eps", required=True)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("pressure", help="pressure reconstruction")
    p.add_argument("curve")
    p.add_argument("--nr", type=int, default=12)
    p.add_argument("--ntheta", type=int, default=64)
    p.add_argument("--rmin", type=float, default=None)
    p.add_argument("-o", "--output", default="pressure.csv")
    p.set_defaults(func=_cmd_pressure)

    p = sub.add_parser("symmetry", help="symmetry margins for a curve")
    p.add_argument("curve")
    p.set_defaults(func=_cmd_symmetry)

    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except BlowUpError as exc:  # pragma: no cover (simulate handles its own)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except HeliosError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

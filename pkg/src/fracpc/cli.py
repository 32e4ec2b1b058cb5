"""Command-line front end: ``fracpc solve | bench | gm``.

Settings resolve as flag > ``--config`` file > built-in default. Exit codes:
0 success, 2 usage or validation error, 3 numerical divergence, 4 I/O error.
"""

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .bench import BENCH_COLUMNS, TABLE_IDS, run_table, worker_count
from .errors import DivergenceError, FracPCError
from .gm import GMParams, gm_classify, gm_equilibrium
from .model import DerivativeKind, Scheme, SolverConfig, make_grid
from .problems import PROBLEM_IDS, builtin, max_abs_error
from .schemes import solve

EXIT_OK, EXIT_USAGE, EXIT_DIVERGED, EXIT_IO = 0, 2, 3, 4


class CLIUsageError(Exception):
    pass


# name -> (converter, applies to subcommands)
_SETTINGS = {
    "problem": (str, {"solve"}),
    "scheme": (str, {"solve"}),
    "kind": (str, {"solve", "gm"}),
    "alpha": (float, {"solve", "gm"}),
    "beta": (float, {"solve"}),
    "dt": (str, {"solve", "gm"}),
    "t_end": (str, {"solve", "gm"}),
    "sweeps": (int, {"solve", "gm"}),
    "out": (str, {"solve", "bench", "gm"}),
    "report": (str, {"solve", "bench", "gm"}),
    "emit_plot_script": (None, {"solve", "gm"}),
    "table": (int, {"bench"}),
}

_GM_DEFAULTS = {"alpha": 0.85, "dt": "0.01", "t_end": "100", "kind": "caputo", "out": "gm_trajectory.csv"}


def _fmt(x):
    return format(float(x), ".17g")


def _parse_bool(text):
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise CLIUsageError(f"expected a boolean, got {text!r}")


def _parse_param(text):
    name, sep, value = text.partition("=")
    if not sep or not name.strip():
        raise CLIUsageError(f"--param expects NAME=VALUE, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise CLIUsageError(f"parameter {name.strip()!r} needs a number, got {value!r}") from None


def read_config(path):
    """Parse a ``key = value`` file; ``#`` starts a comment. Keys use ``_`` or ``-``."""
    entries = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep or not key.strip():
                raise CLIUsageError(f"{path}:{lineno}: expected key = value")
            entries[key.strip().replace("-", "_")] = value.strip()
    return entries


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fracpc",
        description="Predictor-corrector solvers for classical and fractional ODEs.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, plot=True):
        p.add_argument("--config", help="key=value file supplying defaults")
        p.add_argument("--out", help="output CSV path ('-' for stdout)")
        p.add_argument("--report", help="JSON report path ('-' for stdout)")
        if plot:
            p.add_argument(
                "--emit-plot-script", action="store_const", const=True, default=None,
                help="write a gnuplot script next to each CSV",
            )

    def run_flags(p):
        p.add_argument("--kind", choices=[k.value for k in DerivativeKind])
        p.add_argument("--alpha", type=float, help="derivative order in (0, 1]")
        p.add_argument("--dt", help="step size, decimal or fraction such as 1/300")
        p.add_argument("--t-end", dest="t_end", help="end of the integration span")
        p.add_argument("--sweeps", type=int, help="corrector sweeps per step (default 1)")
        p.add_argument(
            "--param", action="append", default=[], metavar="NAME=VALUE",
            help="override a problem parameter (repeatable)",
        )

    p_solve = sub.add_parser("solve", help="integrate one problem and write its trajectory")
    p_solve.add_argument("--problem", choices=PROBLEM_IDS)
    p_solve.add_argument("--scheme", choices=[s.value for s in Scheme])
    p_solve.add_argument("--beta", type=float, help="exponent of the power-rhs problem")
    run_flags(p_solve)
    common(p_solve)

    p_bench = sub.add_parser("bench", help="re-run a published error table")
    p_bench.add_argument("--table", type=int, choices=TABLE_IDS)
    common(p_bench, plot=False)

    p_gm = sub.add_parser("gm", help="Gierer-Meinhardt stability report and simulation")
    run_flags(p_gm)
    common(p_gm)
    return parser


def resolve(args):
    """Merge flags, config file and defaults into a plain settings dict."""
    cmd = args.command
    config = {}
    if getattr(args, "config", None):
        config = read_config(args.config)
    settings, params = {}, {}
    for key, raw in config.items():
        if key == "config":
            raise CLIUsageError("a config file cannot name another config file")
        if key in _SETTINGS:
            conv, scope = _SETTINGS[key]
            if cmd not in scope:
                raise CLIUsageError(f"config key {key!r} does not apply to {cmd}")
            try:
                settings[key] = _parse_bool(raw) if conv is None else conv(raw)
            except ValueError:
                raise CLIUsageError(f"config key {key!r}: bad value {raw!r}") from None
        elif key.startswith("param.") or cmd != "bench":
            params[key.removeprefix("param.")] = _parse_param(f"{key}={raw}")[1]
        else:
            raise CLIUsageError(f"unknown config key {key!r}")
    for key in _SETTINGS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    for item in getattr(args, "param", []) or []:
        name, value = _parse_param(item)
        params[name] = value
    return settings, params


# output helpers -----------------------------------------------------------------

def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", encoding="utf-8", newline=""), True


def write_csv(path, header, rows):
    fh, close = _open_out(path)
    try:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(v if isinstance(v, str) else _fmt(v) for v in row) + "\n")
    finally:
        if close:
            fh.close()
        else:
            fh.flush()


def write_trajectory(path, traj):
    header = ["t"] + [f"y{j + 1}" for j in range(traj.dim)]
    rows = ([t, *y] for t, y in zip(traj.t, traj.states))
    write_csv(path, header, rows)


def write_plot_script(csv_path, n_series, xlabel="t", phase=False):
    script = Path(csv_path).with_suffix(".gp")
    name = Path(csv_path).name
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set xlabel '{'a' if phase else xlabel}'",
    ]
    if phase:
        lines += ["set ylabel 'h'", f"plot '{name}' using 1:2 with lines"]
    else:
        parts = [f"'{name}' using 1:{j + 2} with lines" for j in range(n_series)]
        lines.append("plot " + ", \\\n     ".join(parts))
    script.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return script


def _json_safe(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def write_json(path, payload):
    text = json.dumps(_json_safe(payload), indent=2, allow_nan=False) + "\n"
    fh, close = _open_out(path)
    try:
        fh.write(text)
    finally:
        if close:
            fh.close()


def _require_file_for_plot(settings):
    if settings.get("emit_plot_script") and settings.get("out") in (None, "-"):
        raise CLIUsageError("--emit-plot-script needs --out to name a file")


# subcommands ----------------------------------------------------------------------

def cmd_solve(settings, params):
    problem = builtin(settings.get("problem", "exp-linear"))
    kind = DerivativeKind(settings.get("kind", problem.default_kind.value))
    if "beta" in settings:
        params["beta"] = settings["beta"]
    alpha = 1.0 if kind is DerivativeKind.CLASSICAL else settings.get("alpha", problem.default_alpha)
    if kind is DerivativeKind.CLASSICAL and settings.get("alpha", 1.0) != 1.0:
        raise CLIUsageError("--kind classical requires alpha = 1")
    if "dt" not in settings:
        raise CLIUsageError("solve needs --dt")
    t_end = settings.get("t_end", repr(problem.default_span))
    sweeps = settings.get("sweeps", 1)
    resolved = problem.params(**params)
    manifest = {
        "subcommand": "solve",
        "problem": problem.id,
        "scheme": Scheme(settings.get("scheme", "ppc")).value,
        "kind": kind.value,
        "alpha": alpha,
        "params": resolved,
        "dt": settings["dt"],
        "t_end": t_end,
        "corrector_sweeps": sweeps,
        "out": settings.get("out", "-"),
        "report": settings.get("report"),
        "emit_plot_script": bool(settings.get("emit_plot_script", False)),
    }
    _require_file_for_plot(manifest)
    grid = make_grid(manifest["dt"], t_end)
    config = SolverConfig(Scheme(manifest["scheme"]), sweeps)
    ivp = problem.make_ivp(alpha=alpha, kind=kind, **resolved)
    config.check_compatible(kind)

    status, diverged_at = EXIT_OK, None
    try:
        traj = solve(ivp, config, grid)
    except DivergenceError as exc:
        traj, status, diverged_at = exc.trajectory, EXIT_DIVERGED, exc.step
        print(f"fracpc: {exc}; diverged_at={exc.step}", file=sys.stderr)

    write_trajectory(manifest["out"], traj)
    if manifest["emit_plot_script"]:
        write_plot_script(manifest["out"], traj.dim)
    if manifest["report"]:
        report = {
            "manifest": manifest,
            "n_steps": grid.n_steps,
            "rows_written": len(traj),
            "final_state": traj.states[-1].tolist(),
            "diverged_at": diverged_at,
        }
        if problem.has_exact:
            report["max_abs_error"] = max_abs_error(
                traj, lambda t: problem.exact(t, alpha=alpha, **resolved)
            )
        write_json(manifest["report"], report)
    return status


def _bench_row(result):
    # inputs echo as their shortest round-trip repr, computed values at 17 digits
    method, alpha, dt, err, ref, ratio = result.row()
    return [method, repr(alpha), repr(dt), err, repr(ref), ratio]


def cmd_bench(settings, params):
    if params:
        raise CLIUsageError("bench takes no problem parameters")
    if "table" not in settings:
        raise CLIUsageError("bench needs --table")
    table = settings["table"]
    if table not in TABLE_IDS:
        raise CLIUsageError(f"--table must be one of {TABLE_IDS}")
    results = run_table(table, worker_count())
    out = settings.get("out", "-")
    write_csv(out, BENCH_COLUMNS, [_bench_row(r) for r in results])
    if settings.get("report"):
        write_json(
            settings["report"],
            {
                "manifest": {"subcommand": "bench", "table": table, "out": out},
                "cells": [dict(zip(BENCH_COLUMNS, r.row())) for r in results],
            },
        )
    return EXIT_OK


def gm_report(alpha, p):
    """The stability summary for parameters ``p`` at order ``alpha``."""
    v = gm_classify(alpha, p)
    return {
        "alpha": alpha,
        "params": p.as_dict(),
        "equilibrium": gm_equilibrium(p).tolist(),
        "trace": v.trace,
        "determinant": v.determinant,
        "discriminant": v.discriminant,
        "eigenvalues": [{"re": lam.real, "im": lam.imag} for lam in v.eigenvalues],
        "threshold_lhs": v.threshold_lhs,
        "threshold_rhs": v.threshold_rhs,
        "verdict": v.verdict.value,
        "branch": v.branch,
    }


def cmd_gm(settings, params):
    merged = {**_GM_DEFAULTS, **settings}
    kind = DerivativeKind(merged["kind"])
    if kind is not DerivativeKind.CAPUTO and kind is not DerivativeKind.ATANGANA_BALEANU:
        raise CLIUsageError("gm supports --kind caputo or abc")
    alpha = float(merged["alpha"])
    unknown = set(params) - set(GMParams().as_dict())
    if unknown:
        raise CLIUsageError(f"unknown GM parameter(s) {sorted(unknown)}")
    p = GMParams(**params)
    sweeps = merged.get("sweeps", 1)
    out = merged["out"]
    phase_out = None if out == "-" else str(Path(out).with_name(Path(out).stem + "_phase.csv"))
    manifest = {
        "subcommand": "gm",
        "problem": "gierer-meinhardt",
        "scheme": "ppc",
        "kind": kind.value,
        "alpha": alpha,
        "params": p.as_dict(),
        "dt": merged["dt"],
        "t_end": merged["t_end"],
        "corrector_sweeps": sweeps,
        "out": out,
        "phase_out": phase_out,
        "report": merged.get("report", "-"),
        "emit_plot_script": bool(merged.get("emit_plot_script", False)),
    }
    _require_file_for_plot(manifest)
    report = gm_report(alpha, p)
    grid = make_grid(manifest["dt"], manifest["t_end"])
    ivp = builtin("gierer-meinhardt").make_ivp(alpha=alpha, kind=kind, **p.as_dict())

    status, diverged_at = EXIT_OK, None
    try:
        traj = solve(ivp, SolverConfig(Scheme.PROPOSED_PC, sweeps), grid)
    except DivergenceError as exc:
        traj, status, diverged_at = exc.trajectory, EXIT_DIVERGED, exc.step
        print(f"fracpc: {exc}; diverged_at={exc.step}", file=sys.stderr)

    write_trajectory(out, traj)
    if phase_out:
        write_csv(phase_out, ["a", "h"], traj.states.tolist())
    if manifest["emit_plot_script"]:
        write_plot_script(out, traj.dim)
        write_plot_script(phase_out, 2, phase=True)
    eq = gm_equilibrium(p)
    final = traj.states[-1]
    report.update(
        final_state=final.tolist(),
        distance_to_equilibrium=float(math.hypot(*(final - eq))),
        diverged_at=diverged_at,
        manifest=manifest,
    )
    write_json(manifest["report"], report)
    return status


_COMMANDS = {"solve": cmd_solve, "bench": cmd_bench, "gm": cmd_gm}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings, params = resolve(args)
        return _COMMANDS[args.command](settings, params)
    except DivergenceError as exc:
        print(f"fracpc: {exc}; diverged_at={exc.step}", file=sys.stderr)
        return EXIT_DIVERGED
    except (CLIUsageError, FracPCError, ValueError) as exc:
        print(f"fracpc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"fracpc: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()

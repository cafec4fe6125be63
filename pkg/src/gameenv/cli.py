"""Command-line front end.

Subcommands mirror the analysis modules; every numeric value is written in
scientific notation with 12 significant digits so repeated runs produce
byte-identical files.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 acceptance-check failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import figures
from .bifurcation import dulac_exponents, heteroclinic_classification, hopf_point, mu0_threshold
from .control import control_thresholds, start_grid, verify_design
from .cycles import CSV_COLUMNS, sweep_mu, sweep_u_amplitude
from .equilibria import all_equilibria
from .errors import GameEnvError, NumericalError, ParameterError
from .flow import IntegratorOptions, integrate
from .lienard import all_pass, check_lienard_conditions, lienard_transform
from .model import load_params, params_from_mapping

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CHECK = 0, 2, 3, 4
TASKS = ("simulate", "equilibria", "bifurc", "sweep", "control-design", "lienard-check",
         "reproduce-figure")
TOL_KEYS = ("rel_tol", "abs_tol", "max_step", "clamp_band")


# -- formatting -------------------------------------------------------------

def fmt_num(v) -> str:
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.11e}"


def clean(obj):
    """Round floats to 12 significant digits; non-finite values become null."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return float(f"{v:.11e}") if math.isfinite(v) else None
    if hasattr(obj, "value"):  # enums
        return obj.value
    return obj


def dumps(obj) -> str:
    return json.dumps(clean(obj), indent=2, sort_keys=True) + "\n"


def csv_text(columns, rows) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt_num(v) for v in row))
    return "\n".join(lines) + "\n"


class Writer:
    """Collects outputs and writes them once computation is complete."""

    def __init__(self, out_dir, fmt):
        self.out = Path(out_dir) if out_dir else None
        self.fmt = fmt
        self.files = {}

    def table(self, stem, columns, rows):
        if self.fmt == "csv":
            self.files[f"{stem}.csv"] = csv_text(columns, rows)
        else:
            self.files[f"{stem}.json"] = dumps([dict(zip(columns, r)) for r in rows])

    def document(self, stem, obj):
        self.files[f"{stem}.json"] = dumps(obj)

    def flush(self):
        if self.out is None:
            return
        self.out.mkdir(parents=True, exist_ok=True)
        for name in sorted(self.files):
            (self.out / name).write_text(self.files[name])


# -- options ----------------------------------------------------------------

def parse_tol(items):
    out = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        if not sep or key not in TOL_KEYS:
            raise ParameterError(f"--tol expects KEY=VALUE with KEY in {TOL_KEYS}, got {item!r}")
        try:
            out[key] = float(val)
        except ValueError:
            raise ParameterError(f"--tol value for {key} is not a number: {val!r}") from None
    return out


def parse_grid(spec):
    """``start:stop:step`` (stop exclusive) or a comma-separated list."""
    if spec is None:
        raise ParameterError("a grid is required")
    if isinstance(spec, (list, tuple)):
        vals = [float(v) for v in spec]
    elif ":" in spec:
        try:
            start, stop, step = (float(t) for t in spec.split(":"))
        except ValueError:
            raise ParameterError(f"malformed grid {spec!r}") from None
        if step <= 0:
            raise ParameterError("grid step must be positive")
        vals = list(np.round(np.arange(start, stop, step), 12))
    else:
        try:
            vals = [float(t) for t in spec.split(",") if t.strip()]
        except ValueError:
            raise ParameterError(f"malformed grid {spec!r}") from None
    if not vals:
        raise ParameterError("grid is empty")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ParameterError("grid must be strictly increasing")
    return vals


def _params(args):
    if getattr(args, "param_data", None) is not None:
        return params_from_mapping(args.param_data)
    if not args.params:
        raise ParameterError("--params <file> is required for this task")
    return load_params(args.params)


def _opts(args, **defaults):
    kw = dict(defaults)
    kw.update(parse_tol(args.tol))
    return IntegratorOptions(**kw)


# -- tasks ------------------------------------------------------------------

def task_simulate(args, w: Writer):
    p = _params(args)
    if args.start is None:
        raise ParameterError("simulate needs --start X R")
    opts = _opts(args, t_end=args.t_end)
    tr = integrate(tuple(args.start), p, opts, backward=args.backward)
    w.table("trajectory", ("t", "x", "r"), [(t, x, r) for t, (x, r) in zip(tr.times, tr.states)])
    summary = {"params": p.to_dict(), "start": list(args.start), "t_end": args.t_end,
               "final": list(tr.final), "steps": len(tr.times) - 1}
    w.document("summary", summary)
    return summary, EXIT_OK


def task_equilibria(args, w: Writer):
    p = _params(args)
    reps = [r.to_dict() for r in all_equilibria(p)]
    w.document("equilibria", reps)
    return reps, EXIT_OK


def task_bifurc(args, w: Writer):
    p = _params(args)
    h = hopf_point(p)
    m0 = mu0_threshold(p)
    out = {"params": p.to_dict(),
           "hopf": h.to_dict() if h else None,
           "mu0": {"value": m0.value, "regime": m0.regime},
           "dulac": dulac_exponents(p).to_dict(),
           "heteroclinic": heteroclinic_classification(p).to_dict()}
    w.document("bifurcation", out)
    return out, EXIT_OK


def task_sweep(args, w: Writer):
    p = _params(args)
    grid = parse_grid(args.grid)
    diag = sweep_mu(p, grid) if args.param == "mu" else sweep_u_amplitude(p, grid)
    rows = [rec.row() for rec in diag.records]
    w.table("diagram", CSV_COLUMNS, rows)
    out = {"parameter": args.param, "verdict": diag.verdict, "points": len(rows),
           "status": [rec.status.value for rec in diag.records]}
    w.document("sweep_summary", out)
    return out, EXIT_OK


def task_control(args, w: Writer):
    p = _params(args)
    design = control_thresholds(p)
    out = {"design": design.to_dict()}
    code = EXIT_OK
    if args.verify:
        u = design.recommended_u
        t = design.target.location
        v = verify_design(p, u, (t.x, t.r), opts=_opts(args, t_end=1000.0, max_step=0.5))
        out["verification"] = {"u": u, "passed": v.passed, "max_distance": float(v.distances.max())}
        w.table("verification", ("x0", "r0", "x_final", "r_final", "distance"),
                [(s[0], s[1], f[0], f[1], d) for s, f, d in zip(start_grid(), v.finals, v.distances)])
        if args.trajectories:
            q = p.with_(u=u)
            for k, s in enumerate(start_grid()):
                tr = integrate(s, q, _opts(args, t_end=200.0, max_step=0.5))
                w.table(f"traj{k:02d}", ("t", "x", "r"),
                        [(t_, x, r) for t_, (x, r) in zip(tr.times, tr.states)])
        if not v.passed:
            code = EXIT_CHECK
    w.document("control_design", out)
    return out, code


def task_lienard(args, w: Writer):
    p = _params(args)
    form = lienard_transform(p)
    verdicts = check_lienard_conditions(form)
    out = {"r_star_prime": form.r_star_prime, "mu1": form.mu1, "nu": form.nu,
           "conditions": {k: v.to_dict() for k, v in verdicts.items()},
           "all_pass": all_pass(verdicts)}
    w.document("lienard", out)
    return out, EXIT_OK if out["all_pass"] else EXIT_CHECK


def task_figure(args, w: Writer):
    res = figures.reproduce(args.figure)
    for stem, (cols, rows) in res.tables.items():
        w.table(f"{res.name}_{stem}", cols, rows)
    out = {"figure": res.name, "params": res.params, "summary": res.summary,
           "checks": [{"name": n, "passed": ok, "detail": d} for n, ok, d in res.checks],
           "passed": res.passed}
    w.document(f"{res.name}_summary", out)
    return out, EXIT_OK if res.passed else EXIT_CHECK


HANDLERS = {"simulate": task_simulate, "equilibria": task_equilibria, "bifurc": task_bifurc,
            "sweep": task_sweep, "control-design": task_control, "lienard-check": task_lienard,
            "reproduce-figure": task_figure}


# -- scenarios --------------------------------------------------------------

def load_scenario(path):
    """Read a scenario file: ``{"name", "task", "params" | "params_file", "options"}``."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ParameterError(f"cannot read scenario {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParameterError(f"malformed scenario {path}: {exc}") from exc
    if not isinstance(data, dict) or "task" not in data or "name" not in data:
        raise ParameterError("scenario needs 'name' and 'task'")
    if data["task"] not in TASKS:
        raise ParameterError(f"unknown task {data['task']!r}; expected one of {TASKS}")
    opts = data.get("options", {})
    if not isinstance(opts, dict):
        raise ParameterError("scenario 'options' must be an object")
    fig = opts.get("figure")
    if fig is not None and fig not in figures.FIGURES:
        raise ParameterError(f"unknown figure id {fig!r}")
    return data, path.parent


def scenario_namespace(data, base_dir, args):
    ns = argparse.Namespace(**vars(args))
    ns.task = data["task"]
    ns.param_data = data.get("params")
    if "params_file" in data:
        ns.params = str((base_dir / data["params_file"]).resolve())
    opts = data.get("options", {})
    ns.start = opts.get("start")
    ns.t_end = float(opts.get("t_end", 100.0))
    ns.backward = bool(opts.get("backward", False))
    ns.param = opts.get("param", "mu")
    ns.grid = opts.get("grid")
    ns.verify = bool(opts.get("verify", False))
    ns.trajectories = bool(opts.get("trajectories", False))
    ns.figure = opts.get("figure")
    ns.tol = list(args.tol or []) + [f"{k}={v}" for k, v in opts.get("tol", {}).items()]
    return ns


# -- entry point ------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="gameenv", description=__doc__.split("\n")[0])
    ap.add_argument("--params", help="parameter file (.json or .toml)")
    ap.add_argument("--out", help="output directory for data files")
    ap.add_argument("--format", choices=("csv", "json"), default="csv",
                    help="format of tabular outputs")
    ap.add_argument("--tol", action="append", metavar="KEY=VALUE",
                    help=f"integrator override, KEY in {', '.join(TOL_KEYS)}")
    sub = ap.add_subparsers(dest="task", required=True)

    s = sub.add_parser("simulate", help="integrate one trajectory")
    s.add_argument("--start", nargs=2, type=float, metavar=("X", "R"))
    s.add_argument("--t-end", type=float, default=100.0)
    s.add_argument("--backward", action="store_true")
    sub.add_parser("equilibria", help="all equilibria with stability")
    sub.add_parser("bifurc", help="Hopf point, Lyapunov coefficient, Dulac threshold")
    s = sub.add_parser("sweep", help="bifurcation diagram over mu or u")
    s.add_argument("--param", choices=("mu", "u"), default="mu")
    s.add_argument("--grid", required=True, help="start:stop:step or v1,v2,...")
    s = sub.add_parser("control-design", help="incentive regime and recommendation")
    s.add_argument("--verify", action="store_true", help="simulate the 5x5 start grid")
    s.add_argument("--trajectories", action="store_true", help="also emit trajectories")
    sub.add_parser("lienard-check", help="uniqueness conditions of the Liénard form")
    s = sub.add_parser("reproduce-figure", help="data and checks for one figure")
    s.add_argument("figure", choices=figures.FIGURES)
    s = sub.add_parser("run", help="execute a scenario file")
    s.add_argument("scenario")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_CONFIG if exc.code else EXIT_OK
    args.param_data = None
    w = Writer(args.out, args.format)
    try:
        if args.task == "run":
            data, base = load_scenario(args.scenario)
            args = scenario_namespace(data, base, args)
        if args.task == "reproduce-figure" and args.figure is None:
            raise ParameterError("reproduce-figure needs a figure id")
        result, code = HANDLERS[args.task](args, w)
    except NumericalError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except GameEnvError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    w.flush()
    sys.stdout.write(dumps(result))
    return code


if __name__ == "__main__":
    sys.exit(main())

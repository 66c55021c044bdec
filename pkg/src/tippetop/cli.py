"""Command-line front end: ``tippetop simulate|classify|equilibria|diagram``.

Exit codes: 0 success, 1 usage or validation error, 2 model breakdown.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import dynamics as dyn
from .equilibria import solve_intermediate, vertical_states
from .errors import DegenerateCase, ModelBreakdown, ParameterError
from .model import PARAM_KEYS, TopParams, load_params, validate
from .simulate import IntegratorConfig, Termination, integrate_full, monitor_report
from .stability import classify, diagram, is_linearly_stable, stability_flag

EXIT_OK, EXIT_USAGE, EXIT_BREAKDOWN = 0, 1, 2


class UsageError(Exception):
    """Invalid flag combination; reported with exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _param_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("top parameters (SI units)")
    g.add_argument("--preset", metavar="FILE", help="JSON file with keys m,R,eps,A,C,mu,g")
    for name in PARAM_KEYS:
        g.add_argument(f"--{name}", type=float, help=f"override {name}")
    g.add_argument("--A-over-C", dest="A_over_C", type=float, metavar="RATIO",
                   help="inertia ratio; sets A = RATIO * C")
    g.add_argument("--eps-over-R", dest="eps_over_R", type=float, metavar="RATIO",
                   help="eccentricity ratio; sets eps = RATIO * R")


def _output_flags(p: argparse.ArgumentParser, default_format: str) -> None:
    p.add_argument("--out", metavar="DIR", help="output directory (created if missing)")
    p.add_argument("--format", choices=("csv", "json"), default=default_format)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tippetop", description=__doc__.splitlines()[0], allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="integrate the full equations of motion")
    _param_flags(sim)
    s = sim.add_argument_group("initial state")
    s.add_argument("--theta0", type=float, default=0.1)
    s.add_argument("--n0", type=float, help="upright spin defining J = C n0 (R - eps)")
    s.add_argument("--phidot0", type=float)
    s.add_argument("--psidot0", type=float)
    s.add_argument("--thetadot0", type=float, default=0.0)
    i = sim.add_argument_group("integrator")
    i.add_argument("--tend", type=float, default=10.0)
    i.add_argument("--rtol", type=float, default=1e-10)
    i.add_argument("--atol", type=float, default=1e-10)
    _output_flags(sim, "csv")

    cls = sub.add_parser("classify", help="print the classification report")
    _param_flags(cls)
    _output_flags(cls, "json")

    eq = sub.add_parser("equilibria", help="steady states on one Jellet level")
    _param_flags(eq)
    eq.add_argument("--n0", type=float, required=True, help="upright spin defining J")
    _output_flags(eq, "json")

    dia = sub.add_parser("diagram", help="bifurcation diagram data over a J^2 range")
    _param_flags(dia)
    dia.add_argument("--jsq-min", type=float)
    dia.add_argument("--jsq-max", type=float)
    dia.add_argument("--steps", type=int, default=400)
    _output_flags(dia, "csv")
    return parser


def params_from_args(args) -> TopParams:
    values: dict[str, float] = {}
    if args.preset:
        try:
            values = load_params(args.preset).to_dict()
        except OSError as exc:
            raise UsageError(f"cannot read preset: {exc}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"preset is not valid JSON: {exc}") from None
    values.setdefault("mu", 0.1)
    values.setdefault("g", 9.81)
    for name in PARAM_KEYS:
        v = getattr(args, name)
        if v is not None:
            values[name] = v
    if args.A_over_C is not None:
        if args.A is not None:
            raise UsageError("give either --A or --A-over-C, not both")
        if "C" not in values:
            raise UsageError("--A-over-C needs C")
        values["A"] = args.A_over_C * values["C"]
    if args.eps_over_R is not None:
        if args.eps is not None:
            raise UsageError("give either --eps or --eps-over-R, not both")
        if "R" not in values:
            raise UsageError("--eps-over-R needs R")
        values["eps"] = args.eps_over_R * values["R"]
    missing = [k for k in PARAM_KEYS if k not in values]
    if missing:
        raise UsageError(f"missing parameters: {', '.join(missing)} (use --preset or flags)")
    return validate(TopParams(**values))


def _out_dir(args) -> Path | None:
    if not args.out:
        return None
    d = Path(args.out)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _initial_state(p: TopParams, args) -> dyn.FullState:
    if args.n0 is not None:
        if args.psidot0 is not None:
            raise UsageError("overdetermined initial spin: give --n0 or --psidot0, not both")
        return dyn.state_from_spin(p, args.theta0, args.n0, phidot0=args.phidot0 or 0.0,
                                   thetadot0=args.thetadot0)
    if args.phidot0 is None or args.psidot0 is None:
        raise UsageError("underdetermined initial spin: give --n0, or both --phidot0 and --psidot0")
    return dyn.FullState(theta=args.theta0, thetadot=args.thetadot0,
                         phidot=args.phidot0, psidot=args.psidot0)


def _trajectory_json(tr) -> str:
    from .simulate import FULL_COLUMNS

    cols = {c: [float(v) for v in tr.column(c)] for c in FULL_COLUMNS[1:]}
    cols = {"t": [float(v) for v in tr.times], **cols}
    return json.dumps(cols)


def run_simulate(args) -> int:
    p = params_from_args(args)
    if not 0.0 <= args.theta0 <= math.pi:
        raise UsageError("--theta0 must lie in [0, pi]")
    try:
        cfg = IntegratorConfig(rel_tol=args.rtol, abs_tol=args.atol, t_end=args.tend)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        state = _initial_state(p, args)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    tr = integrate_full(p, state, cfg)
    summary = monitor_report(tr).to_dict()
    summary["message"] = tr.message
    summary["params"] = p.to_dict()
    summary["initial_state"] = state.__dict__ if isinstance(state, dyn.FullState) else None
    out = _out_dir(args) or Path(".")
    if args.format == "csv":
        tr.to_csv(out / "trajectory.csv")
    else:
        (out / "trajectory.json").write_text(_trajectory_json(tr))
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary))
    if tr.termination is Termination.MODEL_BREAKDOWN:
        print(f"model breakdown: {tr.message}", file=sys.stderr)
        return EXIT_BREAKDOWN
    return EXIT_OK


def run_classify(args) -> int:
    p = params_from_args(args)
    report = classify(p).to_json()
    print(report)
    out = _out_dir(args)
    if out is not None:
        (out / "classification.json").write_text(report + "\n")
    return EXIT_OK


def _linear_stability(p: TopParams, s) -> bool | None:
    try:
        return is_linearly_stable(p, s)
    except DegenerateCase:
        return None


def run_equilibria(args) -> int:
    p = params_from_args(args)
    J = p.C * args.n0 * (p.R - p.eps)
    states = list(vertical_states(p, J)) + solve_intermediate(p, J)
    rows = [{
        "kind": s.kind.value,
        "theta0": s.theta0,
        "J": s.J,
        "spin_n": s.spin_n,
        "phidot0": s.phidot,
        "psidot0": s.psidot,
        "stable": _linear_stability(p, s),
        "curvature_positive": stability_flag(p, s),
    } for s in states]
    if args.format == "json":
        text = json.dumps({"J": J, "states": rows}, indent=2) + "\n"
        name = "equilibria.json"
    else:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{v:.17g}" if isinstance(v, float) else ("" if v is None else v))
                        for k, v in r.items()})
        text = buf.getvalue()
        name = "equilibria.csv"
    sys.stdout.write(text)
    out = _out_dir(args)
    if out is not None:
        (out / name).write_text(text)
    return EXIT_OK


def run_diagram(args) -> int:
    p = params_from_args(args)
    rng = None
    if args.jsq_min is not None or args.jsq_max is not None:
        if args.jsq_min is None or args.jsq_max is None:
            raise UsageError("give both --jsq-min and --jsq-max")
        rng = (args.jsq_min, args.jsq_max)
        if not (math.isfinite(rng[0]) and math.isfinite(rng[1])) or rng[0] < 0 or rng[1] < rng[0]:
            raise UsageError("invalid J^2 range: need 0 <= jsq-min <= jsq-max")
    if args.steps < 2:
        raise UsageError("--steps must be >= 2")
    d = diagram(p, rng, args.steps)
    out = _out_dir(args) or Path(".")
    index = {"group": d.group, "jsq_thresholds": d.jsq_thresholds, "series": []}
    for k, s in enumerate(d.series):
        rows = s.rows
        if args.format == "csv":
            from .equilibria import write_branches_csv

            name = f"series_{k}_{s.kind}.csv"
            write_branches_csv(rows, out / name)
        else:
            name = f"series_{k}_{s.kind}.json"
            (out / name).write_text(json.dumps(
                [{"Jsq": r[0], "theta0": r[1], "stable": bool(r[2]), "kind": r[3]} for r in rows]))
        index["series"].append({"file": name, "kind": s.kind, "rows": len(rows),
                                "transitions": s.transitions()})
    (out / "index.json").write_text(json.dumps(index, indent=2) + "\n")
    print(json.dumps(index))
    return EXIT_OK


COMMANDS = {
    "simulate": run_simulate,
    "classify": run_classify,
    "equilibria": run_equilibria,
    "diagram": run_diagram,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except (UsageError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ModelBreakdown as exc:
        print(f"model breakdown: {exc}", file=sys.stderr)
        return EXIT_BREAKDOWN
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())

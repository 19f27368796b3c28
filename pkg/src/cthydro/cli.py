"""Command-line front end: ``cthydro fit|run|compare|validate|desk``.

Exit codes: 0 success, 2 parse/fit/validation error, 3 infeasible model,
4 solver failure, 5 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .analysis import compare, sample_schedule
from .bernstein import BernsteinDomainError, FitError, fit_rmse, fit_samples, read_samples_csv
from .ctmodel import InfeasibleModel, ModelBuildError, SolveFailure, SolverOptions, solve_ct
from .dtmodel import solve_dt
from .schedule import Schedule, fmt9
from .system import SystemParseError, SystemValidationError, load_system, parse_system, \
    check_invariants, validate_topology

EXIT_OK, EXIT_PARSE, EXIT_INFEASIBLE, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4, 5

log = logging.getLogger("cthydro")

RUN_DEFAULTS = {
    "which": "both",
    "solver": None,
    "gap": 1e-9,
    "time_limit": None,
    "out": "out",
    "resolution": 300.0,
    "drop_hydro_continuity": False,
    "no_c1": False,
    "samples": [],
}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _parse_knots(args) -> np.ndarray:
    if args.knots:
        try:
            return np.array([float(x) for x in args.knots.split(",")])
        except ValueError:
            raise CliError(f"bad --knots {args.knots!r}", EXIT_PARSE) from None
    if args.interval is None:
        raise CliError("give --knots or --interval", EXIT_PARSE)
    return None


def cmd_fit(args) -> int:
    try:
        samples = read_samples_csv(args.csv)
    except OSError as exc:
        raise CliError(f"cannot read {args.csv}: {exc}", EXIT_IO) from None
    except ValueError as exc:
        raise CliError(str(exc), EXIT_PARSE) from None
    knots = _parse_knots(args)
    if knots is None:
        if args.interval <= 0:
            raise CliError("--interval must be positive", EXIT_PARSE)
        start, end = samples[0, 0], samples[-1, 0]
        n = max(1, int(np.ceil((end - start) / args.interval - 1e-9)))
        knots = start + args.interval * np.arange(n + 1)
    try:
        poly = fit_samples(samples, knots, enforce_c1=not args.no_c1)
    except FitError as exc:
        raise CliError(f"fit failed in interval {exc.interval}: {exc}", EXIT_PARSE) from None
    except BernsteinDomainError as exc:
        raise CliError(str(exc), EXIT_PARSE) from None
    rmse = fit_rmse(poly, samples)
    lines = ["interval,t_start_s,t_end_s,c0,c1,c2,c3"]
    for h, iv in enumerate(poly.intervals):
        lines.append(",".join([str(h), repr(poly.knots[h]), repr(poly.knots[h + 1])]
                              + [repr(float(c)) for c in iv.coeffs]))
    try:
        Path(args.output).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise CliError(f"cannot write {args.output}: {exc}", EXIT_IO) from None
    print(f"intervals: {poly.n_intervals}")
    print(f"rmse: {fmt9(rmse)}")
    return EXIT_OK


def _load_config(path) -> dict:
    cfg = dict(RUN_DEFAULTS)
    if path:
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise CliError(f"cannot read config {path}: {exc}", EXIT_IO) from None
        except json.JSONDecodeError as exc:
            raise CliError(f"config {path}: {exc}", EXIT_PARSE) from None
        unknown = set(data) - set(cfg)
        if unknown:
            raise CliError(f"config {path}: unknown key(s) {', '.join(sorted(unknown))}", EXIT_PARSE)
        cfg.update(data)
    return cfg


def _read_reference_samples(items) -> dict:
    refs = {}
    for item in items or []:
        area, sep, path = item.partition("=")
        if not sep:
            raise CliError(f"--samples expects AREA=PATH, got {item!r}", EXIT_PARSE)
        try:
            refs[area] = read_samples_csv(path)
        except OSError as exc:
            raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from None
        except ValueError as exc:
            raise CliError(str(exc), EXIT_PARSE) from None
    return refs


def cmd_run(args) -> int:
    cfg = _load_config(args.config)
    for key in RUN_DEFAULTS:
        val = getattr(args, key, None)
        if val is not None and val is not False and val != []:
            cfg[key] = val
    if not 0.0 <= float(cfg["gap"]) <= 1.0:
        raise CliError(f"gap {cfg['gap']} outside [0, 1]", EXIT_PARSE)
    if cfg["which"] not in ("ct", "dt", "both"):
        raise CliError("--which must be ct, dt or both", EXIT_PARSE)

    try:
        instance = load_system(args.system, enforce_c1=not cfg["no_c1"])
    except (SystemParseError, SystemValidationError, ValueError) as exc:
        raise CliError(str(exc), EXIT_PARSE) from None
    refs = _read_reference_samples(cfg["samples"])

    out = Path(cfg["out"])
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create {out}: {exc}", EXIT_IO) from None
    opts = SolverOptions(
        solver_cmd=cfg["solver"],
        gap=float(cfg["gap"]),
        time_limit=None if cfg["time_limit"] is None else float(cfg["time_limit"]),
        workdir=out,
    )
    schedules = {}
    kinds = ["ct", "dt"] if cfg["which"] == "both" else [cfg["which"]]
    for kind in kinds:
        try:
            if kind == "ct":
                sched = solve_ct(instance, opts, drop_hydro_continuity=bool(cfg["drop_hydro_continuity"]))
            else:
                sched = solve_dt(instance, opts)
        except ModelBuildError as exc:
            raise CliError(str(exc), EXIT_PARSE) from None
        except InfeasibleModel as exc:
            (out / f"{kind}_summary.txt").write_text(f"model: {kind}\nstatus: infeasible\n"
                                                     f"suspected_groups: {', '.join(exc.groups)}\n")
            raise CliError(str(exc), EXIT_INFEASIBLE) from None
        except SolveFailure as exc:
            raise CliError(str(exc), EXIT_SOLVER) from None
        try:
            sched.save(out / f"{kind}_schedule.json")
            sched.write_summary(out / f"{kind}_summary.txt")
            sample_schedule(sched, float(cfg["resolution"]), out / f"{kind}_csv")
        except OSError as exc:
            raise CliError(f"cannot write results: {exc}", EXIT_IO) from None
        print(f"{kind}: {sched.status} objective {fmt9(sched.objective)} "
              f"gap {fmt9(sched.mip_gap)} time {sched.wall_time:.2f} s")
        schedules[kind] = sched

    if len(schedules) == 2:
        report = compare(schedules["ct"], schedules["dt"], refs or None)
        try:
            report.write(out / "imbalance_report.txt")
            report.write_csv(out / "imbalance.csv")
        except OSError as exc:
            raise CliError(f"cannot write report: {exc}", EXIT_IO) from None
        s = report.system
        print(f"system imbalance: dt {fmt9(s.dt_mwh)} MWh, ct {fmt9(s.ct_mwh)} MWh, "
              f"reduction {fmt9(100 * s.reduction)} %")
    return EXIT_OK


def cmd_compare(args) -> int:
    try:
        ct = Schedule.load(args.ct)
        dt = Schedule.load(args.dt)
    except OSError as exc:
        raise CliError(f"cannot read schedule: {exc}", EXIT_IO) from None
    except (ValueError, KeyError) as exc:
        raise CliError(f"malformed schedule file: {exc}", EXIT_PARSE) from None
    refs = _read_reference_samples(args.samples)
    try:
        report = compare(ct, dt, refs or None)
    except BernsteinDomainError as exc:
        raise CliError(str(exc), EXIT_PARSE) from None
    text = report.text()
    if args.output:
        try:
            Path(args.output).write_text(text)
        except OSError as exc:
            raise CliError(f"cannot write {args.output}: {exc}", EXIT_IO) from None
    sys.stdout.write(text)
    return EXIT_OK


def cmd_validate(args) -> int:
    path = Path(args.system)
    try:
        text = path.read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from None
    try:
        instance = parse_system(text, path, enforce_c1=not args.no_c1)
    except (SystemParseError, ValueError) as exc:
        raise CliError(str(exc), EXIT_PARSE) from None
    diags = check_invariants(instance) + validate_topology(instance)
    for d in diags:
        print(d)
    if diags:
        return EXIT_PARSE
    print(f"ok: {len(instance.areas)} areas, {len(instance.reservoirs)} reservoirs, "
          f"{len(instance.plants)} plants, {len(instance.thermal)} thermal units, "
          f"{len(instance.cables)} cables, {instance.n_intervals} intervals")
    return EXIT_OK


def cmd_desk(args) -> int:
    from .desk import write_desk_case

    try:
        path = write_desk_case(args.directory, n_hours=args.hours)
    except OSError as exc:
        raise CliError(f"cannot write desk case: {exc}", EXIT_IO) from None
    print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cthydro", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="least-squares fit of a load CSV to piecewise cubics")
    p.add_argument("csv")
    p.add_argument("-o", "--output", default="fitted_load.csv")
    p.add_argument("--knots", help="comma-separated knot times in seconds")
    p.add_argument("--interval", type=float, help="uniform interval length in seconds")
    p.add_argument("--no-c1", action="store_true", help="fit intervals independently")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("run", help="build and solve the CT and/or DT model")
    p.add_argument("system")
    p.add_argument("--which", choices=("ct", "dt", "both"))
    p.add_argument("--solver", help="solver command (CT_SOLVER overrides)")
    p.add_argument("--gap", type=float, help="relative MIP gap target (default 1e-9)")
    p.add_argument("--time-limit", type=float, dest="time_limit")
    p.add_argument("--out", help="output directory")
    p.add_argument("--resolution", type=float, help="CSV sampling step in seconds")
    p.add_argument("--drop-hydro-continuity", action="store_true", dest="drop_hydro_continuity")
    p.add_argument("--no-c1", action="store_true", dest="no_c1", help="fit loads without C1")
    p.add_argument("--samples", action="append", metavar="AREA=CSV",
                   help="raw load samples used as imbalance reference")
    p.add_argument("--config", help="JSON file with defaults for the options above")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="imbalance report from two saved schedules")
    p.add_argument("ct")
    p.add_argument("dt")
    p.add_argument("--samples", action="append", metavar="AREA=CSV")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("validate", help="parse a system file and list diagnostics")
    p.add_argument("system")
    p.add_argument("--no-c1", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("desk", help="write the synthetic desk instance")
    p.add_argument("directory")
    p.add_argument("--hours", type=int, default=6)
    p.set_defaults(func=cmd_desk)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())

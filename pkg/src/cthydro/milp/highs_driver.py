"""Default external solver: reads an LP/MPS file, solves it with HiGHS through
scipy, and writes a plain ``name value`` solution file.

Usage::

    python -m cthydro.milp.highs_driver MODEL.lp SOLUTION.sol [--gap G] [--time-limit S]

Any other executable following the same argument convention (or a command
template, see :func:`cthydro.milp.solve.solve`) can replace it.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from .fileio import fmt_num, read_model


def run(model_path: str, solution_path: str, gap: float, time_limit: float | None) -> int:
    t0 = time.perf_counter()
    model = read_model(model_path)
    arr = model.to_arrays()
    options = {"disp": False, "mip_rel_gap": gap, "presolve": True}
    if time_limit is not None:
        options["time_limit"] = time_limit
    constraints = []
    if arr.A.shape[0]:
        constraints.append(LinearConstraint(arr.A, arr.row_lo, arr.row_hi))
    res = milp(
        arr.c,
        constraints=constraints,
        integrality=arr.integrality,
        bounds=Bounds(arr.lo, arr.hi),
        options=options,
    )
    elapsed = time.perf_counter() - t0

    x = res.x
    if res.status == 0:
        status = "optimal"
    elif res.status == 1:
        status = "feasible_gap" if x is not None else "error"
    elif res.status == 2:
        status = "infeasible"
    elif res.status == 3:
        status = "unbounded"
    else:
        status = "error"
    mip_gap = getattr(res, "mip_gap", None)
    if mip_gap is None or not np.isfinite(mip_gap):
        mip_gap = 0.0 if status == "optimal" else float("nan")

    with open(solution_path, "w") as fh:
        fh.write(f"# status: {status}\n")
        fh.write(f"# message: {res.message}\n")
        fh.write("# solver: scipy-highs\n")
        if x is not None and status in ("optimal", "feasible_gap"):
            fh.write(f"# objective: {float(res.fun) + arr.obj_constant!r}\n")
            fh.write(f"# mip_gap: {float(mip_gap)!r}\n")
            fh.write(f"# time: {elapsed!r}\n")
            for name, val in zip(arr.names, x):
                fh.write(f"{name} {fmt_num(val) if val == int(val) else repr(float(val))}\n")
    print(f"status {status} ({res.message}); {len(arr.names)} columns, "
          f"{arr.A.shape[0]} rows, {int(arr.integrality.sum())} binaries; {elapsed:.3f} s")
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="cthydro-highs", description=__doc__.splitlines()[0])
    ap.add_argument("model")
    ap.add_argument("solution")
    ap.add_argument("--gap", type=float, default=1e-9)
    ap.add_argument("--time-limit", type=float, default=None)
    args = ap.parse_args(argv)
    try:
        return run(args.model, args.solution, args.gap, args.time_limit)
    except Exception as exc:  # reported through the exit status
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

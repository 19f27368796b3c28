"""Solve a :class:`MilpModel` with an external solver process.

The solver command is resolved in this order: the ``CT_SOLVER`` environment
variable, the ``solver_cmd`` argument, then the bundled HiGHS driver.  A
command containing ``{model}`` is treated as a template with the fields
``model``, ``solution``, ``gap`` and ``time_limit``; otherwise the model and
solution paths are appended, followed by ``--gap G`` and, when set,
``--time-limit S``.
"""

from __future__ import annotations

import logging
import math
import os
import shlex
import subprocess
import sys
import tempfile
import time
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path

from .fileio import write_lp, write_mps
from .model import MilpModel, Var

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
FEASIBLE_GAP = "feasible_gap"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ERROR = "error"
STATUSES = (OPTIMAL, FEASIBLE_GAP, INFEASIBLE, UNBOUNDED, ERROR)

DEFAULT_GAP = 1e-9
SOLVER_ENV = "CT_SOLVER"


def default_solver_cmd() -> list[str]:
    return [sys.executable, "-m", "cthydro.milp.highs_driver"]


@dataclass
class Solution:
    status: str
    values: dict[str, float] = field(default_factory=dict)
    objective: float = math.nan
    mip_gap: float = math.nan
    wall_time: float = 0.0
    message: str = ""
    log: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown solution status {self.status!r}")
        if not self.has_values:
            self.values = {}

    @property
    def has_values(self) -> bool:
        return self.status in (OPTIMAL, FEASIBLE_GAP)

    def __getitem__(self, key: Var | str) -> float:
        name = key.name if isinstance(key, Var) else key
        return self.values[name]

    def value(self, key: Var | str, default: float = 0.0) -> float:
        name = key.name if isinstance(key, Var) else key
        return self.values.get(name, default)


class SolutionParseError(ValueError):
    pass


def parse_solution(text: str) -> dict:
    """Parse solver output into ``{status, values, objective, mip_gap}``.

    Two formats are auto-detected: CPLEX-style XML (``<CPLEXSolution>``) and
    plain ``name value`` lines with optional ``# key: value`` metadata.
    """
    stripped = text.lstrip()
    if stripped.startswith("<"):
        return _parse_xml(stripped)
    return _parse_pairs(text)


def _status_from_text(s: str) -> str:
    s = s.lower()
    if "infeasible" in s and "unbounded" not in s:
        return INFEASIBLE
    if "unbounded" in s:
        return UNBOUNDED
    if "optimal" in s and "limit" not in s:
        return OPTIMAL
    if "limit" in s or "feasible" in s:
        return FEASIBLE_GAP
    return ERROR


def _parse_xml(text: str) -> dict:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise SolutionParseError(f"malformed XML solution: {exc}") from None
    header = root.find("header")
    if header is None:
        raise SolutionParseError("XML solution without <header>")
    status = _status_from_text(header.get("solutionStatusString", ""))
    values = {}
    for var in root.iter("variable"):
        name = var.get("name")
        if name is None or var.get("value") is None:
            raise SolutionParseError("XML <variable> without name/value")
        values[name] = float(var.get("value"))
    return {
        "status": status,
        "values": values,
        "objective": float(header.get("objectiveValue", "nan")),
        "mip_gap": float(header.get("MIPRelativeGap", "0" if status == OPTIMAL else "nan")),
    }


def _parse_pairs(text: str) -> dict:
    meta: dict[str, str] = {}
    values: dict[str, float] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, val = line[1:].partition(":")
            if sep:
                meta[key.strip().lower()] = val.strip()
            continue
        parts = line.split()
        if len(parts) != 2:
            raise SolutionParseError(f"line {lineno}: expected 'name value', got {line!r}")
        try:
            values[parts[0]] = float(parts[1])
        except ValueError:
            raise SolutionParseError(f"line {lineno}: bad value {parts[1]!r}") from None
    if "status" in meta:
        status = meta["status"] if meta["status"] in STATUSES else _status_from_text(meta["status"])
    else:
        status = OPTIMAL if values else ERROR
    return {
        "status": status,
        "values": values,
        "objective": float(meta.get("objective", "nan")),
        "mip_gap": float(meta.get("mip_gap", "0" if status == OPTIMAL else "nan")),
    }


def resolve_command(solver_cmd: str | list[str] | None) -> str | list[str]:
    env = os.environ.get(SOLVER_ENV)
    if env:
        return env
    if solver_cmd:
        return solver_cmd
    return default_solver_cmd()


def _build_argv(cmd, model_path: Path, sol_path: Path, gap: float, time_limit) -> list[str]:
    if isinstance(cmd, str) and "{model}" in cmd:
        filled = cmd.format(
            model=model_path,
            solution=sol_path,
            gap=gap,
            time_limit=time_limit if time_limit is not None else 1e9,
        )
        return shlex.split(filled)
    argv = shlex.split(cmd) if isinstance(cmd, str) else list(cmd)
    argv += [str(model_path), str(sol_path), "--gap", repr(float(gap))]
    if time_limit is not None:
        argv += ["--time-limit", repr(float(time_limit))]
    return argv


def solve(
    model: MilpModel,
    solver_cmd: str | list[str] | None = None,
    gap_target: float = DEFAULT_GAP,
    time_limit: float | None = None,
    *,
    fmt: str = "lp",
    workdir: str | Path | None = None,
    log_path: str | Path | None = None,
) -> Solution:
    """Write the model, run the solver, and read back a :class:`Solution`.

    Variables absent from the solution file are set to 0 with a warning.
    The objective is recomputed from the returned values so it always
    includes the model's constant term.
    """
    if not 0.0 <= gap_target <= 1.0:
        raise ValueError(f"gap target {gap_target} outside [0, 1]")
    cmd = resolve_command(solver_cmd)
    tmp = None
    if workdir is None:
        tmp = tempfile.TemporaryDirectory(prefix="cthydro_")
        workdir = tmp.name
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    try:
        model_path = workdir / f"{model.name}.{fmt}"
        sol_path = workdir / f"{model.name}.sol"
        if sol_path.exists():
            sol_path.unlink()
        (write_mps if fmt == "mps" else write_lp)(model, model_path)
        argv = _build_argv(cmd, model_path, sol_path, gap_target, time_limit)
        hard_limit = None if time_limit is None else 2.0 * time_limit + 60.0
        t0 = time.perf_counter()
        timed_out = False
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=hard_limit)
            out = proc.stdout + proc.stderr
            code = proc.returncode
        except subprocess.TimeoutExpired as exc:
            timed_out = True
            out = (exc.stdout or "") if isinstance(exc.stdout, str) else ""
            code = None
        except OSError as exc:
            return Solution(ERROR, message=f"cannot run solver {argv[0]!r}: {exc}")
        wall = time.perf_counter() - t0
        if log_path is not None:
            Path(log_path).write_text(" ".join(argv) + "\n" + out)

        if timed_out and not sol_path.exists():
            return Solution(ERROR, wall_time=wall, message="solver timed out", log=out)
        if code not in (0, None):
            return Solution(ERROR, wall_time=wall,
                            message=f"solver exited with code {code}", log=out)
        if not sol_path.exists():
            return Solution(ERROR, wall_time=wall, message="solver wrote no solution file", log=out)
        try:
            parsed = parse_solution(sol_path.read_text())
        except SolutionParseError as exc:
            return Solution(ERROR, wall_time=wall, message=f"unparseable solution: {exc}", log=out)
        status = parsed["status"]
        if timed_out and status == OPTIMAL:
            status = FEASIBLE_GAP
        if status not in (OPTIMAL, FEASIBLE_GAP):
            return Solution(status, wall_time=wall, message=f"solver status {status}", log=out)

        values = parsed["values"]
        missing = [v.name for v in model.variables if v.name not in values]
        if missing:
            log.warning("%d variables missing from solution, set to 0 (e.g. %s)",
                        len(missing), missing[0])
        full = {v.name: float(values.get(v.name, 0.0)) for v in model.variables}
        gap = parsed["mip_gap"]
        if status == OPTIMAL and not math.isfinite(gap):
            gap = 0.0
        return Solution(
            status,
            full,
            objective=model.objective.evaluate(full),
            mip_gap=gap,
            wall_time=wall,
            log=out,
        )
    finally:
        if tmp is not None:
            tmp.cleanup()

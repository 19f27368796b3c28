"""Structural imbalance between schedules and load, CT/DT comparison, CSV sampling."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import brentq
from scipy.special import comb

from .bernstein import BernsteinDomainError, PiecewisePoly, elevate
from .schedule import Schedule, fmt9

ROOT_XTOL_S = 1e-12


def bernstein_to_monomial(coeffs) -> np.ndarray:
    """Ascending monomial coefficients in tau of a Bernstein polynomial."""
    c = np.asarray(coeffs, dtype=float)
    n = len(c) - 1
    out = np.zeros(n + 1)
    for i, ci in enumerate(c):
        # C(n,i) tau^i (1 - tau)^(n-i)
        basis = comb(n, i) * P.polymul([0.0] * i + [1.0], P.polypow([1.0, -1.0], n - i))
        out[: len(basis)] += ci * basis
    return out


def roots_in_unit(mono: np.ndarray, xtol: float = 1e-12) -> list[float]:
    """Sign-change roots of a monomial polynomial inside (0, 1).

    Critical points of the derivative (found recursively) split [0, 1] into
    monotone pieces, each holding at most one root, located by bracketing.
    """
    mono = np.trim_zeros(np.asarray(mono, dtype=float), "b")
    if len(mono) <= 1:
        return []
    crit = roots_in_unit(P.polyder(mono), xtol)
    pts = [0.0] + crit + [1.0]
    roots = []
    for a, b in zip(pts, pts[1:]):
        fa, fb = P.polyval(a, mono), P.polyval(b, mono)
        if fa == 0.0 and a > 0.0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(brentq(lambda x: P.polyval(x, mono), a, b, xtol=xtol, rtol=4 * np.finfo(float).eps))
    return sorted(set(roots))


def abs_integral_interval(coeffs, delta: float) -> float:
    """Exact integral of |x(t)| over one interval of length ``delta``."""
    mono = bernstein_to_monomial(coeffs)
    anti = P.polyint(mono)
    pts = [0.0] + roots_in_unit(mono, ROOT_XTOL_S / delta) + [1.0]
    total = 0.0
    for a, b in zip(pts, pts[1:]):
        total += abs(P.polyval(b, anti) - P.polyval(a, anti))
    return delta * total


def abs_integral(p: PiecewisePoly) -> float:
    return float(sum(abs_integral_interval(iv.coeffs, d) for iv, d in zip(p.intervals, p.deltas)))


def structural_imbalance(scheduled: PiecewisePoly, reference, area: str | None = None) -> float:
    """Energy mismatch in MWh between a scheduled trajectory (MW) and a reference load.

    ``reference`` is either a :class:`PiecewisePoly` on the same knots, whose
    difference is integrated exactly, or an array of (time_s, MW) samples,
    integrated with the trapezoid rule on the sample grid.
    """
    where = f" for area {area}" if area else ""
    if isinstance(reference, PiecewisePoly):
        if reference.n_intervals != scheduled.n_intervals or not np.allclose(
            reference.knots, scheduled.knots, rtol=0, atol=1e-6
        ):
            raise BernsteinDomainError(f"horizon mismatch{where}: schedule and reference knots differ")
        diff = [elevate(a.coeffs, max(a.degree, b.degree)) - elevate(b.coeffs, max(a.degree, b.degree))
                for a, b in zip(scheduled.intervals, reference.intervals)]
        mws = sum(abs_integral_interval(c, d) for c, d in zip(diff, scheduled.deltas))
        return float(mws) / 3600.0
    samples = np.asarray(reference, dtype=float)
    t, y = samples[:, 0], samples[:, 1]
    if t[0] < scheduled.start - 1e-9 or t[-1] > scheduled.end + 1e-9:
        raise BernsteinDomainError(f"horizon mismatch{where}: samples outside the schedule horizon")
    gap = np.abs(scheduled(t) - y)
    return float(np.trapezoid(gap, t)) / 3600.0


@dataclass
class AreaImbalance:
    area: str
    dt_mwh: float
    ct_mwh: float
    reduction: float
    dt_zero: bool = False


def reduction(ct: float, dt: float) -> tuple[float, bool]:
    """1 - ct/dt, or (0, True) when dt carries no imbalance."""
    if dt <= 0.0:
        return 0.0, True
    return 1.0 - ct / dt, False


@dataclass
class ImbalanceReport:
    areas: list[AreaImbalance]
    system: AreaImbalance
    cost_ct: float
    cost_dt: float
    sizes: dict[str, dict[str, float]] = field(default_factory=dict)
    reference: str = "fitted"

    @property
    def cost_delta(self) -> float:
        return self.cost_ct - self.cost_dt

    def lines(self, with_timing: bool = True) -> list[str]:
        out = [f"reference_load: {self.reference}", "",
               "area,dt_imbalance_MWh,ct_imbalance_MWh,reduction_pct,dt_zero"]
        for a in self.areas + [self.system]:
            out.append(f"{a.area},{fmt9(a.dt_mwh)},{fmt9(a.ct_mwh)},"
                       f"{fmt9(100 * a.reduction)},{str(a.dt_zero).lower()}")
        out += ["", f"objective_dt_mu: {fmt9(self.cost_dt)}",
                f"objective_ct_mu: {fmt9(self.cost_ct)}",
                f"objective_delta_mu: {fmt9(self.cost_delta)}", "",
                "quantity,dt,ct"]
        for key, row in self.sizes.items():
            if key in ("wall_time_s",) and not with_timing:
                continue
            out.append(f"{key},{fmt9(row['dt'])},{fmt9(row['ct'])}")
        return out

    def text(self, with_timing: bool = True) -> str:
        return "\n".join(self.lines(with_timing)) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.text())

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["area", "dt_imbalance_MWh", "ct_imbalance_MWh", "reduction_pct", "dt_zero"])
            for a in self.areas + [self.system]:
                w.writerow([a.area, fmt9(a.dt_mwh), fmt9(a.ct_mwh), fmt9(100 * a.reduction),
                            str(a.dt_zero).lower()])


def compare(
    ct: Schedule,
    dt: Schedule,
    reference_loads: Mapping[str, object] | None = None,
) -> ImbalanceReport:
    """Per-area and system imbalance of both schedules against reference loads.

    By default the reference is the fitted continuous load stored with the CT
    schedule; pass ``reference_loads`` (area -> PiecewisePoly or sample
    array) to use something else, e.g. raw 5-minute samples.
    """
    refs = dict(ct.loads)
    kind = "fitted"
    if reference_loads:
        refs.update(reference_loads)
        kind = "samples" if any(not isinstance(r, PiecewisePoly) for r in reference_loads.values()) \
            else "custom"
    rows = []
    for area in ct.areas:
        c = structural_imbalance(ct.supply(area), refs[area], area)
        d = structural_imbalance(dt.supply(area), refs[area], area)
        red, flag = reduction(c, d)
        rows.append(AreaImbalance(area, d, c, red, flag))
    sys_ct = sum(r.ct_mwh for r in rows)
    sys_dt = sum(r.dt_mwh for r in rows)
    red, flag = reduction(sys_ct, sys_dt)
    sizes = {
        "binary_variables": {"dt": dt.counts.get("binary", 0), "ct": ct.counts.get("binary", 0)},
        "continuous_variables": {"dt": dt.counts.get("continuous", 0), "ct": ct.counts.get("continuous", 0)},
        "constraints": {"dt": dt.counts.get("constraints", 0), "ct": ct.counts.get("constraints", 0)},
        "mip_gap": {"dt": dt.mip_gap, "ct": ct.mip_gap},
        "wall_time_s": {"dt": dt.wall_time, "ct": ct.wall_time},
    }
    return ImbalanceReport(rows, AreaImbalance("system", sys_dt, sys_ct, red, flag),
                           ct.objective, dt.objective, sizes, kind)


# -- sampling -------------------------------------------------------------------------


def sample_grid(start: float, end: float, resolution: float) -> np.ndarray:
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    n = int(math.floor((end - start) / resolution + 1e-9))
    t = start + resolution * np.arange(n + 1)
    if end - t[-1] > 1e-9 * max(1.0, abs(end)):
        t = np.append(t, end)
    return t


def sample_columns(schedule: Schedule, resolution: float) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    """Sampled trajectories keyed by output file stem."""
    t = sample_grid(schedule.knots[0], schedule.knots[-1], resolution)
    cols: dict[str, np.ndarray] = {}
    for grp, ents in schedule.flows.items():
        for ent, poly in ents.items():
            cols[f"{grp}_{ent}"] = poly(t)
    for rid, poly in schedule.volumes.items():
        cols[f"v_{rid}"] = poly(t)
    for area in schedule.areas:
        cols[f"hydro_sum_{area}"] = schedule.hydro_sum(area)(t)
        cols[f"thermal_sum_{area}"] = schedule.thermal_sum(area)(t)
        cols[f"supply_{area}"] = schedule.supply(area)(t)
        cols[f"load_{area}"] = schedule.loads[area](t)
    for cid, poly in schedule.flows.get("f", {}).items():
        cols[f"cable_flow_{cid}"] = poly(t)
    return t, cols


def sample_schedule(schedule: Schedule, resolution: float, path: str | Path) -> list[Path]:
    """Write one ``time_s,value`` CSV per entity and aggregate into directory ``path``."""
    t, cols = sample_columns(schedule, resolution)
    d = Path(path)
    d.mkdir(parents=True, exist_ok=True)
    written = []
    for stem, vals in cols.items():
        fp = d / f"{stem}.csv"
        with open(fp, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time_s", "value"])
            for ti, vi in zip(t, vals):
                w.writerow([fmt9(ti), fmt9(vi)])
        written.append(fp)
    return written

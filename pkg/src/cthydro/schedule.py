"""Solved schedules: trajectories, commitments, cost breakdown and solver metadata."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bernstein import PiecewisePoly, zero_poly

COST_KEYS = ("alpha", "bypass", "spill", "thermal_operating", "startup", "shutdown")


def fmt9(x: float) -> str:
    """Nine significant digits, the precision used in every report."""
    return f"{float(x):.9g}"


def poly_to_dict(p: PiecewisePoly) -> dict:
    return {"knots": list(p.knots), "coeffs": [list(iv.coeffs) for iv in p.intervals]}


def poly_from_dict(d: dict) -> PiecewisePoly:
    return PiecewisePoly.from_coeffs(d["knots"], d["coeffs"])


@dataclass(frozen=True)
class Schedule:
    """Result of one solve.

    ``flows`` maps a variable group (``p``, ``g``, ``f``, ``qd``, ``qb``,
    ``qo``, ``qs``, ``qnet``, ``qin``, ``qout``, ``qrel``) to entity trajectories.
    Segment trajectories are keyed ``<plant>_s<n>``.  ``volumes`` holds the
    degree-4 reservoir pieces.  ``area_map`` records, per area, its hydro
    plants, thermal units and cable incidences so aggregates can be formed
    without the originating instance.
    """

    kind: str
    status: str
    objective: float
    mip_gap: float
    wall_time: float
    knots: tuple[float, ...]
    flows: dict[str, dict[str, PiecewisePoly]]
    volumes: dict[str, PiecewisePoly]
    commitments: dict[str, dict[str, tuple[int, ...]]]
    breakdown: dict[str, float]
    loads: dict[str, PiecewisePoly]
    area_map: dict[str, dict]
    counts: dict[str, int] = field(default_factory=dict)
    group_counts: dict[str, int] = field(default_factory=dict)
    drop_hydro_continuity: bool = False
    message: str = ""

    @property
    def areas(self) -> list[str]:
        return list(self.area_map)

    def traj(self, group: str, entity: str) -> PiecewisePoly:
        return self.flows[group][entity]

    def hydro_sum(self, area: str) -> PiecewisePoly:
        out = zero_poly(self.knots)
        for pid in self.area_map[area]["hydro"]:
            out = out + self.flows["p"][pid]
        return out

    def thermal_sum(self, area: str) -> PiecewisePoly:
        out = zero_poly(self.knots)
        for jid in self.area_map[area]["thermal"]:
            out = out + self.flows["g"][jid]
        return out

    def supply(self, area: str) -> PiecewisePoly:
        """Net scheduled injection serving the area load: production minus export."""
        out = self.hydro_sum(area) + self.thermal_sum(area)
        for cid, sign in self.area_map[area]["cables"].items():
            out = out - self.flows["f"][cid] * float(sign)
        return out

    def objective_per_mwh(self) -> float:
        """Objective normalized by total served load energy."""
        energy = sum(p.integral() for p in self.loads.values()) / 3600.0
        return self.objective / energy if energy > 0 else float("nan")

    # -- persistence ------------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "status": self.status,
            "objective": self.objective,
            "mip_gap": self.mip_gap,
            "wall_time": self.wall_time,
            "knots": list(self.knots),
            "flows": {g: {e: poly_to_dict(p) for e, p in ents.items()}
                      for g, ents in self.flows.items()},
            "volumes": {r: poly_to_dict(p) for r, p in self.volumes.items()},
            "commitments": {g: {e: list(v) for e, v in ents.items()}
                            for g, ents in self.commitments.items()},
            "breakdown": dict(self.breakdown),
            "loads": {a: poly_to_dict(p) for a, p in self.loads.items()},
            "area_map": self.area_map,
            "counts": dict(self.counts),
            "group_counts": dict(self.group_counts),
            "drop_hydro_continuity": self.drop_hydro_continuity,
            "message": self.message,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Schedule":
        klass = DtSchedule if d["kind"] == "dt" else Schedule
        return klass(
            kind=d["kind"],
            status=d["status"],
            objective=float(d["objective"]),
            mip_gap=float(d["mip_gap"]),
            wall_time=float(d["wall_time"]),
            knots=tuple(d["knots"]),
            flows={g: {e: poly_from_dict(p) for e, p in ents.items()}
                   for g, ents in d["flows"].items()},
            volumes={r: poly_from_dict(p) for r, p in d["volumes"].items()},
            commitments={g: {e: tuple(int(x) for x in v) for e, v in ents.items()}
                         for g, ents in d["commitments"].items()},
            breakdown={k: float(v) for k, v in d["breakdown"].items()},
            loads={a: poly_from_dict(p) for a, p in d["loads"].items()},
            area_map=d["area_map"],
            counts=d.get("counts", {}),
            group_counts=d.get("group_counts", {}),
            drop_hydro_continuity=bool(d.get("drop_hydro_continuity", False)),
            message=d.get("message", ""),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1, allow_nan=True))

    @classmethod
    def load(cls, path: str | Path) -> "Schedule":
        return cls.from_dict(json.loads(Path(path).read_text()))

    # -- reporting -----------------------------------------------------------------
    def summary_lines(self, with_timing: bool = True) -> list[str]:
        lines = [
            f"model: {self.kind}",
            f"status: {self.status}",
            f"objective_mu: {fmt9(self.objective)}",
            f"objective_mu_per_MWh: {fmt9(self.objective_per_mwh())}",
            f"mip_gap: {fmt9(self.mip_gap)}",
        ]
        lines += [f"cost_{k}: {fmt9(self.breakdown.get(k, 0.0))}" for k in COST_KEYS]
        lines += [f"count_{k}: {v}" for k, v in self.counts.items()]
        lines += [f"rows_{k}: {v}" for k, v in sorted(self.group_counts.items())]
        lines.append(f"drop_hydro_continuity: {str(self.drop_hydro_continuity).lower()}")
        if with_timing:
            lines.append(f"wall_time_s: {fmt9(self.wall_time)}")
        return lines

    def write_summary(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self.summary_lines()) + "\n")


class DtSchedule(Schedule):
    """Hourly schedule; every trajectory is constant within an interval."""


def step_values(p: PiecewisePoly) -> np.ndarray:
    """Interval values of a piecewise-constant trajectory."""
    return p.interval_means()

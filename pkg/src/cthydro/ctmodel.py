"""Continuous-time hydrothermal MILP with cubic Bernstein trajectories.

Every time-varying quantity gets one coefficient vector per interval.
Variable names follow ``<group>_<entity>_<interval>_<coeff>`` (scalars drop
the coefficient index), so a solution file maps back to trajectories by name.
Flows are in m3/s, power in MW, volumes in m3, time in seconds.

Constraint groups (used in size reports and infeasibility diagnosis)::

    topology            flow definitions per reservoir and plant
    volume_init         initial volume
    volume_balance      volume change per interval
    volume_bounds       convex-hull bounds on the degree-4 volume pieces
    cuts                future cost cuts
    production          segment sums, production, segment ordering
    balance             area power balance
    cable_ramp          cable ramping
    thermal_uc          thermal capacity rows and start/stop logic
    thermal_ramp        thermal ramping with start/stop gains
    hydro_uc            hydro capacity rows and start/stop logic
    cont_thermal, cont_cable, cont_bypass, cont_spill, cont_hydro
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bernstein import PiecewisePoly, elevate
from .milp import (
    BINARY,
    FEASIBLE_GAP,
    INFEASIBLE,
    OPTIMAL,
    LinExpr,
    MilpModel,
    Solution,
    Var,
    lin_sum,
    solve,
)
from .milp.solve import DEFAULT_GAP
from .schedule import DtSchedule, Schedule
from .system import SECONDS_PER_HOUR, SystemInstance

log = logging.getLogger(__name__)

MIN_DELTA = 60.0
ELASTIC_WEIGHT = 1e6


class ModelBuildError(ValueError):
    """Instance cannot be turned into a model (e.g. interval too short)."""


class SolveFailure(RuntimeError):
    """Solver returned no usable solution."""

    def __init__(self, message: str, status: str, groups: list[str] | None = None,
                 model: MilpModel | None = None):
        super().__init__(message)
        self.status = status
        self.groups = groups or []
        self.model = model


class InfeasibleModel(SolveFailure):
    pass


@dataclass(frozen=True)
class SolverOptions:
    solver_cmd: str | list[str] | None = None
    gap: float = DEFAULT_GAP
    time_limit: float | None = None
    workdir: str | Path | None = None
    diagnose: bool = True


class CtBuilder:
    """Allocates variables and adds constraint groups for one instance."""

    kind = "ct"
    ncoef = 4

    def __init__(self, instance: SystemInstance, drop_hydro_continuity: bool = False):
        short = [d for d in instance.deltas if d < MIN_DELTA]
        if short:
            raise ModelBuildError(f"interval length {short[0]:g} s below {MIN_DELTA:g} s")
        self.inst = instance
        self.drop_hydro_continuity = drop_hydro_continuity
        self.N = instance.n_intervals
        self.model = MilpModel(self.kind)
        self.vec: dict[tuple, list[Var]] = {}
        self.sc: dict[tuple, Var] = {}

    # -- variable helpers ------------------------------------------------------------
    def _vector(self, grp, ent, lo=-math.inf, hi=math.inf):
        for h in range(self.N):
            self.vec[grp, ent, h] = [
                self.model.add_var(self._vname(grp, ent, h, k), lo, hi, tags=(grp, ent, h, k))
                for k in range(self.ncoef)
            ]

    def _vname(self, grp, ent, h, k):
        return f"{grp}_{ent}_{h}" if self.ncoef == 1 else f"{grp}_{ent}_{h}_{k}"

    def _scalar(self, grp, ent, h, lo=-math.inf, hi=math.inf, binary=False):
        name = f"{grp}_{ent}_{h}"
        if binary:
            v = self.model.add_var(name, max(lo, 0.0), min(hi, 1.0), BINARY, tags=(grp, ent, h))
        else:
            v = self.model.add_var(name, lo, hi, tags=(grp, ent, h))
        self.sc[grp, ent, h] = v
        return v

    def V(self, grp, ent, h) -> list[Var]:
        return self.vec[grp, ent, h]

    def con(self, lhs, sense, rhs, name, group):
        self.model.add_constraint(lhs, sense, rhs, name=name, group=group)

    def load_vec(self, area_id: str, h: int) -> np.ndarray:
        iv = self.inst.area(area_id).load.intervals[h]
        if iv.degree > 3:
            raise ModelBuildError(f"load of area {area_id}: degree {iv.degree} above 3")
        return elevate(iv.coeffs, 3)

    # -- allocation ------------------------------------------------------------------
    def allocate(self):
        inst, N = self.inst, self.N
        for r in inst.reservoirs:
            self._vector("qnet", r.id)
            self._vector("qin", r.id)
            self._vector("qout", r.id)
            self._vector("qo", r.id, 0.0)
        for p in inst.plants:
            self._vector("qd", p.id, 0.0, p.Q_d)
            self._vector("qb", p.id, 0.0, p.Q_b)
            self._vector("qrel", p.id, 0.0)
            self._vector("p", p.id)
            for s in p.segments:
                self._vector("qs", f"{p.id}_s{s.index}", 0.0, s.Q_s)
        for j in inst.thermal:
            self._vector("g", j.id)
        for c in inst.cables:
            self._vector("f", c.id, -c.F_max, c.F_max)
        for r in inst.reservoirs:
            for h in range(N + 1):
                self._scalar("v", r.id, h)
        if inst.cuts:
            self.alpha = self.model.add_var("alpha", -math.inf, math.inf, tags=("alpha",))
        else:
            log.warning("no future cost cuts given: alpha fixed to 0")
            self.alpha = self.model.add_var("alpha", 0.0, 0.0, tags=("alpha",))
        for j in inst.thermal:
            for h in range(N):
                if h == 0:
                    self._scalar("u", j.id, 0, j.u_init, j.u_init, binary=True)
                else:
                    self._scalar("u", j.id, h, binary=True)
        for p in inst.plants:
            for s in p.segments:
                for h in range(N):
                    self._scalar("w", f"{p.id}_s{s.index}", h, binary=True)
        for p in inst.plants:
            for h in range(N):
                self._scalar("z", p.id, h, binary=True)
        for j in inst.thermal:
            for h in range(N - 1):
                self._scalar("su", j.id, h, binary=True)
                self._scalar("sd", j.id, h, binary=True)
        if self.has_hydro_switch_binaries:
            for p in inst.plants:
                for h in range(N - 1):
                    self._scalar("zu", p.id, h, binary=True)
                    self._scalar("zd", p.id, h, binary=True)

    has_hydro_switch_binaries = True

    # -- constraint groups -----------------------------------------------------------
    def build_objective(self):
        inst, nc = self.inst, self.ncoef
        obj = LinExpr()
        obj.add_term(self.alpha, 1.0)
        for h, d in enumerate(inst.deltas):
            w = d / nc
            for p in inst.plants:
                for x in self.V("qb", p.id, h):
                    obj.add_term(x, w * inst.bypass_penalty)
            for r in inst.reservoirs:
                for x in self.V("qo", r.id, h):
                    obj.add_term(x, w * inst.spill_penalty)
            for j in inst.thermal:
                for x in self.V("g", j.id, h):
                    obj.add_term(x, w * j.C / SECONDS_PER_HOUR)
        for j in inst.thermal:
            for h in range(self.N - 1):
                obj.add_term(self.sc["su", j.id, h], j.C_up)
                obj.add_term(self.sc["sd", j.id, h], j.C_down)
        self.model.set_objective(obj)

    def build_topology(self):
        inst = self.inst
        for h in range(self.N):
            for r in inst.reservoirs:
                plant = inst.plant_of(r.id)
                qnet, qin, qout, qo = (self.V(g, r.id, h) for g in ("qnet", "qin", "qout", "qo"))
                upstream = []
                for p in inst.plants:
                    if p.discharge_to == r.id:
                        upstream.append(self.V("qd", p.id, h))
                    if p.bypass_to == r.id:
                        upstream.append(self.V("qb", p.id, h))
                for r2 in inst.reservoirs:
                    if r2.spill_to == r.id:
                        upstream.append(self.V("qo", r2.id, h))
                for k in range(self.ncoef):
                    self.con(qnet[k] - qin[k] + qout[k], "=", r.inflow[h],
                             f"net_{r.id}_{h}_{k}", "topology")
                    out_k = qo[k] + (self.V("qrel", plant.id, h)[k] if plant else 0.0)
                    self.con(qout[k] - out_k, "=", 0.0, f"out_{r.id}_{h}_{k}", "topology")
                    self.con(qin[k] - lin_sum(u[k] for u in upstream), "=", 0.0,
                             f"in_{r.id}_{h}_{k}", "topology")
            for p in inst.plants:
                creek = inst.creek(p)[h]
                qrel, qd, qb = (self.V(g, p.id, h) for g in ("qrel", "qd", "qb"))
                for k in range(self.ncoef):
                    self.con(qrel[k] - qd[k] - qb[k], "=", -creek, f"rel_{p.id}_{h}_{k}", "topology")

    def build_volume(self):
        inst = self.inst
        for r in inst.reservoirs:
            self.con(self.sc["v", r.id, 0], "=", r.V_init, f"vinit_{r.id}", "volume_init")
        for h, d in enumerate(inst.deltas):
            for r in inst.reservoirs:
                v0, v1 = self.sc["v", r.id, h], self.sc["v", r.id, h + 1]
                q = self.V("qnet", r.id, h)
                self.con(v1 - v0 - (d / 4.0) * lin_sum(q), "=", 0.0, f"vbal_{r.id}_{h}", "volume_balance")
                # coefficient k of N^T q is (q_0 + ... + q_{k-1}) / 4
                for k in range(5):
                    piece = v0 + (d / 4.0) * lin_sum(q[:k])
                    self.con(piece, ">=", 0.0, f"vlo_{r.id}_{h}_{k}", "volume_bounds")
                    self.con(piece, "<=", r.V_max, f"vhi_{r.id}_{h}_{k}", "volume_bounds")

    def build_cuts(self):
        inst = self.inst
        for cut in inst.cuts:
            rhs = lin_sum(cut.coefficient(r.id) * self.sc["v", r.id, self.N] for r in inst.reservoirs)
            self.con(self.alpha - rhs, ">=", cut.D, f"cut_{cut.id}", "cuts")

    def build_production(self):
        inst = self.inst
        for h in range(self.N):
            for p in inst.plants:
                qd, pp = self.V("qd", p.id, h), self.V("p", p.id, h)
                segs = [(s, self.V("qs", f"{p.id}_s{s.index}", h),
                         self.sc["w", f"{p.id}_s{s.index}", h]) for s in p.segments]
                for k in range(self.ncoef):
                    self.con(qd[k] - lin_sum(q[k] for _, q, _ in segs), "=", 0.0,
                             f"dsum_{p.id}_{h}_{k}", "production")
                    self.con(pp[k] - lin_sum(s.eta * q[k] for s, q, _ in segs), "=", 0.0,
                             f"pq_{p.id}_{h}_{k}", "production")
                prev_w = None
                for s, q, w in segs:
                    tag = f"{p.id}_s{s.index}_{h}"
                    for k in range(self.ncoef):
                        if s.forbidden:
                            self.con(q[k] - s.Q_s * w, "=", 0.0, f"sfix_{tag}_{k}", "production")
                        else:
                            self.con(q[k] - s.Q_s * w, ">=", 0.0, f"slo_{tag}_{k}", "production")
                        if prev_w is not None:
                            self.con(q[k] - s.Q_s * prev_w, "<=", 0.0, f"sord_{tag}_{k}", "production")
                    prev_w = w

    def build_power_balance(self):
        inst = self.inst
        for h in range(self.N):
            for a in inst.areas:
                load = self.load_vec(a.id, h)
                if self.ncoef == 1:
                    load = [float(np.mean(load))]
                terms = [self.V("p", p.id, h) for p in inst.plants_in(a.id)]
                terms += [self.V("g", j.id, h) for j in inst.thermal_in(a.id)]
                cab = [(c.incidence(a.id), self.V("f", c.id, h)) for c in inst.cables
                       if c.incidence(a.id)]
                for k in range(self.ncoef):
                    expr = lin_sum(t[k] for t in terms) - lin_sum(G * f[k] for G, f in cab)
                    self.con(expr, "=", load[k], f"bal_{a.id}_{h}_{k}", "balance")

    def _ramp_rows(self, x, d, up_rhs, dn_rhs, tag, group):
        """3(x_{k+1} - x_k)/d within [-dn_rhs, up_rhs]; rhs may be LinExpr (start gains)."""
        for k in range(3):
            slope = (3.0 / d) * (x[k + 1] - x[k])
            if up_rhs is not None:
                self.con(slope - up_rhs, "<=", 0.0, f"{tag}_up_{k}", group)
            if dn_rhs is not None:
                self.con(slope + dn_rhs, ">=", 0.0, f"{tag}_dn_{k}", group)

    def build_cable(self):
        for h, d in enumerate(self.inst.deltas):
            for c in self.inst.cables:
                up = None if math.isinf(c.R_u) else LinExpr(constant=c.R_u)
                dn = None if math.isinf(c.R_d) else LinExpr(constant=c.R_d)
                self._ramp_rows(self.V("f", c.id, h), d, up, dn, f"framp_{c.id}_{h}", "cable_ramp")

    def _thermal_commitment_logic(self):
        for j in self.inst.thermal:
            for h in range(self.N - 1):
                su, sd = self.sc["su", j.id, h], self.sc["sd", j.id, h]
                u0, u1 = self.sc["u", j.id, h], self.sc["u", j.id, h + 1]
                self.con(su - sd - u1 + u0, "=", 0.0, f"ustate_{j.id}_{h}", "thermal_uc")
                self.con(su + sd, "<=", 1.0, f"uonce_{j.id}_{h}", "thermal_uc")

    def build_thermal(self):
        inst, N = self.inst, self.N
        for j in inst.thermal:
            for h in range(N):
                g = self.V("g", j.id, h)
                u_h = self.sc["u", j.id, h]
                u_vec = [u_h, u_h, self.sc["u", j.id, h + 1], self.sc["u", j.id, h + 1]] \
                    if h < N - 1 else [u_h] * 4
                for k in range(4):
                    self.con(g[k] - j.G_min * u_vec[k], ">=", 0.0, f"gmin_{j.id}_{h}_{k}", "thermal_uc")
                    self.con(g[k] - j.G_max * u_vec[k], "<=", 0.0, f"gmax_{j.id}_{h}_{k}", "thermal_uc")
        self._thermal_commitment_logic()
        for h, d in enumerate(inst.deltas):
            for j in inst.thermal:
                up = dn = None
                if not math.isinf(j.R_u):
                    up = LinExpr(constant=j.R_u)
                    if h < N - 1:
                        up.add_term(self.sc["su", j.id, h], j.R_up_gain)
                if not math.isinf(j.R_d):
                    dn = LinExpr(constant=j.R_d)
                    if h < N - 1:
                        dn.add_term(self.sc["sd", j.id, h], j.R_down_gain)
                self._ramp_rows(self.V("g", j.id, h), d, up, dn, f"gramp_{j.id}_{h}", "thermal_ramp")

    def _hydro_capacity_rows(self):
        for p in self.inst.plants:
            for h in range(self.N):
                z = self.sc["z", p.id, h]
                for k, x in enumerate(self.V("p", p.id, h)):
                    self.con(x - p.P_min * z, ">=", 0.0, f"pmin_{p.id}_{h}_{k}", "hydro_uc")
                    self.con(x - p.P_max * z, "<=", 0.0, f"pmax_{p.id}_{h}_{k}", "hydro_uc")

    def build_hydro_uc(self):
        self._hydro_capacity_rows()
        for p in self.inst.plants:
            for h in range(self.N - 1):
                zu, zd = self.sc["zu", p.id, h], self.sc["zd", p.id, h]
                z0, z1 = self.sc["z", p.id, h], self.sc["z", p.id, h + 1]
                self.con(zu - zd - z1 + z0, "=", 0.0, f"zstate_{p.id}_{h}", "hydro_uc")
                self.con(zu + zd, "<=", 1.0, f"zonce_{p.id}_{h}", "hydro_uc")

    def _c1_rows(self, grp, ent, group):
        d = self.inst.deltas
        for h in range(self.N - 1):
            a, b = self.V(grp, ent, h), self.V(grp, ent, h + 1)
            self.con(a[3] - b[0], "=", 0.0, f"c0_{grp}_{ent}_{h}", group)
            # slopes in absolute time: (a3 - a2)/d_h = (b1 - b0)/d_{h+1}
            self.con((a[3] - a[2]) - (d[h] / d[h + 1]) * (b[1] - b[0]), "=", 0.0,
                     f"c1_{grp}_{ent}_{h}", group)

    def _c0_rows(self, grp, ent, group):
        for h in range(self.N - 1):
            self.con(self.V(grp, ent, h)[3] - self.V(grp, ent, h + 1)[0], "=", 0.0,
                     f"c0_{grp}_{ent}_{h}", group)

    def build_continuity(self):
        inst = self.inst
        for j in inst.thermal:
            self._c1_rows("g", j.id, "cont_thermal")
        for c in inst.cables:
            self._c1_rows("f", c.id, "cont_cable")
        for p in inst.plants:
            self._c0_rows("qb", p.id, "cont_bypass")
        for r in inst.reservoirs:
            self._c0_rows("qo", r.id, "cont_spill")
        if self.drop_hydro_continuity:
            return
        for p in inst.plants:
            for h in range(self.N - 1):
                end, start = self.V("p", p.id, h)[3], self.V("p", p.id, h + 1)[0]
                self.con(end - start - p.P_max * self.sc["zd", p.id, h], "<=", 0.0,
                         f"pjdn_{p.id}_{h}", "cont_hydro")
                self.con(start - end - p.P_max * self.sc["zu", p.id, h], "<=", 0.0,
                         f"pjup_{p.id}_{h}", "cont_hydro")

    def build(self) -> MilpModel:
        self.allocate()
        self.build_objective()
        self.build_topology()
        self.build_volume()
        self.build_cuts()
        self.build_production()
        self.build_power_balance()
        self.build_cable()
        self.build_thermal()
        self.build_hydro_uc()
        self.build_continuity()
        return self.model

    # -- extraction ------------------------------------------------------------------
    def _poly(self, values, grp, ent) -> PiecewisePoly:
        rows = []
        for h in range(self.N):
            xs = [values[v.name] for v in self.V(grp, ent, h)]
            rows.append(xs * 4 if self.ncoef == 1 else xs)
        return PiecewisePoly.from_coeffs(self.inst.knots, rows)

    def _bits(self, values, grp, ent, n) -> tuple[int, ...]:
        return tuple(int(round(values[self.sc[grp, ent, h].name])) for h in range(n))

    def breakdown(self, values) -> dict[str, float]:
        inst, nc = self.inst, self.ncoef
        out = dict.fromkeys(("alpha", "bypass", "spill", "thermal_operating", "startup", "shutdown"), 0.0)
        out["alpha"] = float(values[self.alpha.name])
        for h, d in enumerate(inst.deltas):
            w = d / nc
            for p in inst.plants:
                out["bypass"] += w * inst.bypass_penalty * math.fsum(
                    values[x.name] for x in self.V("qb", p.id, h))
            for r in inst.reservoirs:
                out["spill"] += w * inst.spill_penalty * math.fsum(
                    values[x.name] for x in self.V("qo", r.id, h))
            for j in inst.thermal:
                out["thermal_operating"] += w * j.C / SECONDS_PER_HOUR * math.fsum(
                    values[x.name] for x in self.V("g", j.id, h))
        for j in inst.thermal:
            for h in range(self.N - 1):
                out["startup"] += j.C_up * values[self.sc["su", j.id, h].name]
                out["shutdown"] += j.C_down * values[self.sc["sd", j.id, h].name]
        return out

    def extract(self, sol: Solution) -> Schedule:
        inst, values, N = self.inst, sol.values, self.N
        flows: dict[str, dict[str, PiecewisePoly]] = {}
        for grp in ("qnet", "qin", "qout", "qo"):
            flows[grp] = {r.id: self._poly(values, grp, r.id) for r in inst.reservoirs}
        for grp in ("qd", "qb", "qrel", "p"):
            flows[grp] = {p.id: self._poly(values, grp, p.id) for p in inst.plants}
        flows["qs"] = {f"{p.id}_s{s.index}": self._poly(values, "qs", f"{p.id}_s{s.index}")
                       for p in inst.plants for s in p.segments}
        flows["g"] = {j.id: self._poly(values, "g", j.id) for j in inst.thermal}
        flows["f"] = {c.id: self._poly(values, "f", c.id) for c in inst.cables}

        volumes = {}
        for r in inst.reservoirs:
            rows = []
            for h, d in enumerate(inst.deltas):
                v0 = values[self.sc["v", r.id, h].name]
                q = flows["qnet"][r.id].intervals[h].array
                rows.append(v0 + d * np.concatenate([[0.0], np.cumsum(q) / 4.0]))
            volumes[r.id] = PiecewisePoly.from_coeffs(inst.knots, rows)

        commits: dict[str, dict[str, tuple[int, ...]]] = {
            "u": {j.id: self._bits(values, "u", j.id, N) for j in inst.thermal},
            "z": {p.id: self._bits(values, "z", p.id, N) for p in inst.plants},
            "w": {f"{p.id}_s{s.index}": self._bits(values, "w", f"{p.id}_s{s.index}", N)
                  for p in inst.plants for s in p.segments},
            "su": {j.id: self._bits(values, "su", j.id, N - 1) for j in inst.thermal},
            "sd": {j.id: self._bits(values, "sd", j.id, N - 1) for j in inst.thermal},
        }
        if self.has_hydro_switch_binaries:
            commits["zu"] = {p.id: self._bits(values, "zu", p.id, N - 1) for p in inst.plants}
            commits["zd"] = {p.id: self._bits(values, "zd", p.id, N - 1) for p in inst.plants}

        area_map = {
            a.id: {
                "hydro": [p.id for p in inst.plants_in(a.id)],
                "thermal": [j.id for j in inst.thermal_in(a.id)],
                "cables": {c.id: c.incidence(a.id) for c in inst.cables if c.incidence(a.id)},
            }
            for a in inst.areas
        }
        klass = DtSchedule if self.kind == "dt" else Schedule
        return klass(
            kind=self.kind,
            status=sol.status,
            objective=sol.objective,
            mip_gap=sol.mip_gap,
            wall_time=sol.wall_time,
            knots=inst.knots,
            flows=flows,
            volumes=volumes,
            commitments=commits,
            breakdown=self.breakdown(values),
            loads={a.id: a.load for a in inst.areas},
            area_map=area_map,
            counts=self.model.counts(),
            group_counts=self.model.group_counts(),
            drop_hydro_continuity=self.drop_hydro_continuity,
            message=sol.message,
        )


def diagnose_infeasibility(model: MilpModel, options: SolverOptions, tol: float = 1e-6) -> list[str]:
    """Constraint groups carrying slack in the elastic relaxation, largest first."""
    relaxed, slack_group = model.elastic_copy(ELASTIC_WEIGHT)
    sol = solve(relaxed, options.solver_cmd, gap_target=max(options.gap, 1e-6),
                time_limit=options.time_limit)
    if not sol.has_values:
        return []
    totals: dict[str, float] = {}
    for name, grp in slack_group.items():
        x = sol.values.get(name, 0.0)
        if x > tol:
            totals[grp] = totals.get(grp, 0.0) + x
    return sorted(totals, key=lambda g: -totals[g])


def run_builder(builder: CtBuilder, options: SolverOptions | None = None) -> Schedule:
    options = options or SolverOptions()
    model = builder.build()
    workdir = Path(options.workdir) if options.workdir is not None else None
    log_path = workdir / f"{model.name}_solver.log" if workdir is not None else None
    if workdir is not None:
        workdir.mkdir(parents=True, exist_ok=True)
    sol = solve(model, options.solver_cmd, options.gap, options.time_limit,
                workdir=workdir, log_path=log_path)
    if sol.status in (OPTIMAL, FEASIBLE_GAP):
        return builder.extract(sol)
    if sol.status == INFEASIBLE:
        groups = diagnose_infeasibility(model, options) if options.diagnose else []
        msg = f"{model.name} model infeasible"
        if groups:
            msg += "; suspected constraint groups: " + ", ".join(groups)
        raise InfeasibleModel(msg, sol.status, groups, model)
    raise SolveFailure(f"{model.name} model: {sol.status}: {sol.message}".rstrip(": "),
                       sol.status, model=model)


def build_ct(instance: SystemInstance, drop_hydro_continuity: bool = False) -> MilpModel:
    return CtBuilder(instance, drop_hydro_continuity).build()


def solve_ct(instance: SystemInstance, options: SolverOptions | None = None,
             drop_hydro_continuity: bool = False) -> Schedule:
    """Build, solve and extract the continuous-time schedule.

    Raises
    ------
    InfeasibleModel
        With ``groups`` naming the constraint groups that needed slack.
    SolveFailure
        For unbounded models or solver errors.
    """
    return run_builder(CtBuilder(instance, drop_hydro_continuity), options)

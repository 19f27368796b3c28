"""Hourly discrete-time counterpart of the continuous-time model.

Each quantity is one scalar per interval.  Topology, segment ordering,
forbidden segments, cuts and the objective mirror the continuous-time model
with scalars in place of coefficient vectors.  The load per interval is the
exact mean of the fitted load polynomial.  Ramping acts on differences
between consecutive intervals, scaled by the interval length.
"""

from __future__ import annotations

import math

from .ctmodel import CtBuilder, SolverOptions, run_builder
from .milp import LinExpr, MilpModel
from .schedule import DtSchedule
from .system import SystemInstance


class DtBuilder(CtBuilder):
    kind = "dt"
    ncoef = 1
    # hydro switch binaries only serve the production jump limits, which have
    # no hourly counterpart
    has_hydro_switch_binaries = False

    def __init__(self, instance: SystemInstance):
        super().__init__(instance, drop_hydro_continuity=True)

    def build_volume(self):
        inst = self.inst
        for r in inst.reservoirs:
            self.con(self.sc["v", r.id, 0], "=", r.V_init, f"vinit_{r.id}", "volume_init")
            for h in range(1, self.N + 1):
                v = self.sc["v", r.id, h]
                v.lo, v.hi = 0.0, r.V_max
        for h, d in enumerate(inst.deltas):
            for r in inst.reservoirs:
                v0, v1 = self.sc["v", r.id, h], self.sc["v", r.id, h + 1]
                q = self.V("qnet", r.id, h)[0]
                self.con(v1 - v0 - d * q, "=", 0.0, f"vbal_{r.id}_{h}", "volume_balance")

    def _step_ramp(self, x0, x1, d, up, dn, tag, group):
        if up is not None:
            self.con(x1 - x0 - d * up, "<=", 0.0, f"{tag}_up", group)
        if dn is not None:
            self.con(x0 - x1 - d * dn, "<=", 0.0, f"{tag}_dn", group)

    def build_cable(self):
        for c in self.inst.cables:
            for h in range(self.N - 1):
                d = self.inst.deltas[h]
                up = None if math.isinf(c.R_u) else LinExpr(constant=c.R_u)
                dn = None if math.isinf(c.R_d) else LinExpr(constant=c.R_d)
                self._step_ramp(self.V("f", c.id, h)[0], self.V("f", c.id, h + 1)[0], d, up, dn,
                                f"framp_{c.id}_{h}", "cable_ramp")

    def build_thermal(self):
        inst = self.inst
        for j in inst.thermal:
            for h in range(self.N):
                g, u = self.V("g", j.id, h)[0], self.sc["u", j.id, h]
                self.con(g - j.G_min * u, ">=", 0.0, f"gmin_{j.id}_{h}", "thermal_uc")
                self.con(g - j.G_max * u, "<=", 0.0, f"gmax_{j.id}_{h}", "thermal_uc")
        self._thermal_commitment_logic()
        for j in inst.thermal:
            for h in range(self.N - 1):
                d = inst.deltas[h]
                up = dn = None
                if not math.isinf(j.R_u):
                    up = LinExpr(constant=j.R_u).add_term(self.sc["su", j.id, h], j.R_up_gain)
                if not math.isinf(j.R_d):
                    dn = LinExpr(constant=j.R_d).add_term(self.sc["sd", j.id, h], j.R_down_gain)
                self._step_ramp(self.V("g", j.id, h)[0], self.V("g", j.id, h + 1)[0], d, up, dn,
                                f"gramp_{j.id}_{h}", "thermal_ramp")

    def build_hydro_uc(self):
        self._hydro_capacity_rows()

    def build_continuity(self):
        pass


def build_dt(instance: SystemInstance) -> MilpModel:
    return DtBuilder(instance).build()


def solve_dt(instance: SystemInstance, options: SolverOptions | None = None) -> DtSchedule:
    """Build, solve and extract the hourly schedule (same errors as ``solve_ct``)."""
    return run_builder(DtBuilder(instance), options)

"""Synthetic desk-scale instances.

All loads are generated as 5-minute samples and fitted with C1 continuity,
the same path a measured load takes through ``load_system``.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .bernstein import PiecewisePoly, fit_samples, write_samples_csv
from .system import (
    Area,
    Cable,
    Cut,
    DischargeSegment,
    HydroPlant,
    Reservoir,
    SystemInstance,
    ThermalUnit,
    system_text,
)

HOUR = 3600.0
SAMPLE_STEP = 300.0


def sample_times(n_hours: int, step: float = SAMPLE_STEP) -> np.ndarray:
    return np.arange(0.0, n_hours * HOUR + step / 2, step)


def hydro_area_load(t: np.ndarray) -> np.ndarray:
    """Smooth evening-peak shape, MW."""
    return 95.0 + 40.0 * np.sin(2 * np.pi * t / (6 * HOUR) - 0.6) + 8.0 * np.sin(2 * np.pi * t / (2 * HOUR))


def thermal_area_load(t: np.ndarray) -> np.ndarray:
    """Net load with a steep solar ramp in the middle of the horizon, MW."""
    ramp = 45.0 * np.tanh((t - 3 * HOUR) / (0.6 * HOUR))
    return 80.0 - ramp + 10.0 * np.cos(2 * np.pi * t / (3 * HOUR))


def fitted(fn, n_hours: int, enforce_c1: bool = True) -> PiecewisePoly:
    t = sample_times(n_hours)
    knots = np.arange(n_hours + 1) * HOUR
    return fit_samples(np.column_stack([t, fn(t)]), knots, enforce_c1=enforce_c1)


DESK_CABLE_RAMP = 1.0 / 60.0  # MW/s, i.e. 1 MW/min


def cascade_instance(n_hours: int = 6, cable_ramp: float = DESK_CABLE_RAMP) -> SystemInstance:
    """Two areas joined by one cable.

    The hydro area holds two cascaded reservoirs; the lower plant has an
    all-or-nothing first segment, i.e. a forbidden zone between 0 and 18 MW.
    The thermal area holds a cheap slow unit and an expensive fast unit.
    ``cable_ramp`` defaults to 1 MW/min, tight enough to bind on the desk
    loads; the interconnector practice of 30 MW/min never binds at this size.
    """
    knots = np.arange(n_hours + 1) * HOUR
    inflow1 = tuple(40.0 + 10.0 * math.sin(h) for h in range(n_hours))
    reservoirs = (
        Reservoir("R1", 4.0e6, 2.5e6, inflow1, spill_to="R2"),
        Reservoir("R2", 2.0e6, 1.0e6, (8.0,) * n_hours, spill_to="SINK"),
    )
    plants = (
        HydroPlant(
            "P1", "R1", "hydro", Q_d=100.0, Q_b=30.0, P_min=0.0, P_max=90.0,
            segments=(DischargeSegment(0, 50.0, 1.0), DischargeSegment(1, 50.0, 0.8)),
            discharge_to="R2", bypass_to="R2",
        ),
        HydroPlant(
            "P2", "R2", "hydro", Q_d=80.0, Q_b=30.0, P_min=18.0, P_max=78.0,
            segments=(DischargeSegment(0, 20.0, 0.9, forbidden=True), DischargeSegment(1, 60.0, 1.0)),
            discharge_to="SINK", bypass_to="SINK",
        ),
    )
    thermal = (
        ThermalUnit("T1", "thermal", 20.0, 100.0, C=30.0, C_up=500.0, C_down=200.0,
                    R_u=0.03, R_d=0.03, R_up_gain=0.02, R_down_gain=0.02, u_init=1),
        ThermalUnit("T2", "thermal", 5.0, 60.0, C=80.0, C_up=100.0, C_down=50.0,
                    R_u=0.1, R_d=0.1, R_up_gain=0.05, R_down_gain=0.05, u_init=0),
    )
    cables = (Cable("L1", "hydro", "thermal", F_max=50.0, R_u=cable_ramp, R_d=cable_ramp),)
    # water in R1 passes both plants, so it is worth more
    cuts = (
        Cut("K1", 0.016 * 4.0e6 + 0.008 * 2.0e6, (("R1", -0.016), ("R2", -0.008))),
        Cut("K2", 0.010 * 4.0e6 + 0.005 * 2.0e6 + 5000.0, (("R1", -0.010), ("R2", -0.005))),
    )
    areas = (
        Area("hydro", fitted(hydro_area_load, n_hours)),
        Area("thermal", fitted(thermal_area_load, n_hours)),
    )
    return SystemInstance(
        deltas=tuple(np.diff(knots)),
        areas=areas,
        reservoirs=reservoirs,
        plants=plants,
        thermal=thermal,
        cables=cables,
        cuts=cuts,
        bypass_penalty=0.001,
        spill_penalty=0.002,
    )


def single_reservoir_instance(inflow=(30.0, 10.0, 50.0, 20.0), V_init=1.0e6) -> SystemInstance:
    """One reservoir, one plant with eta = 1, hydro-only area.

    Bypass and spill are penalized and water has no future value, so the
    plant discharges exactly the load (in m3/s) and the volume follows in
    closed form from inflow and load.
    """
    n = len(inflow)
    load = fitted(lambda t: 30.0 + 10.0 * np.sin(2 * np.pi * t / (n * HOUR)), n)
    return SystemInstance(
        deltas=(HOUR,) * n,
        areas=(Area("A", load),),
        reservoirs=(Reservoir("R1", 1.0e7, V_init, tuple(float(x) for x in inflow)),),
        plants=(HydroPlant("P1", "R1", "A", 60.0, 10.0, 0.0, 60.0,
                           (DischargeSegment(0, 60.0, 1.0),)),),
        bypass_penalty=0.01,
        spill_penalty=0.01,
    )


def segment_order_instance(n_hours: int = 2) -> SystemInstance:
    """Hydro plant whose second segment is more efficient than the first.

    Water is valued at 36 mu per m3/s-hour, so the efficient segment (36
    mu/MWh) beats the thermal unit (50 mu/MWh) which beats the inefficient
    first segment (72 mu/MWh).  A relaxation would run the second segment
    alone; the ordering binaries force the first segment full before that.
    """
    load = fitted(lambda t: 12.0 + 8.0 * np.sin(2 * np.pi * t / (2 * HOUR) - 1.2), n_hours)
    return SystemInstance(
        deltas=(HOUR,) * n_hours,
        areas=(Area("A", load),),
        reservoirs=(Reservoir("R1", 1.0e6, 5.0e5, (5.0,) * n_hours),),
        plants=(HydroPlant("P1", "R1", "A", 20.0, 0.0, 0.0, 15.0,
                           (DischargeSegment(0, 10.0, 0.5), DischargeSegment(1, 10.0, 1.0))),),
        thermal=(ThermalUnit("T1", "A", 0.0, 30.0, C=50.0, u_init=1),),
        cuts=(Cut("K1", 0.01 * 1.0e6, (("R1", -0.01),)),),
    )


def thermal_only_instance(load: float = 50.0, n_hours: int = 1) -> SystemInstance:
    knots = np.arange(n_hours + 1) * HOUR
    return SystemInstance(
        deltas=(HOUR,) * n_hours,
        areas=(Area("A", PiecewisePoly.constant(knots, load)),),
        reservoirs=(),
        thermal=(
            ThermalUnit("T1", "A", 10.0, 100.0, C=25.0, C_up=300.0, u_init=1,
                        R_u=0.05, R_d=0.05),
            ThermalUnit("T2", "A", 10.0, 100.0, C=60.0, C_up=300.0, u_init=0,
                        R_u=0.05, R_d=0.05),
        ),
    )


def write_desk_case(directory: str | Path, n_hours: int = 6) -> Path:
    """Write the cascade instance as a system file with 5-minute load CSVs.

    The loads are re-fitted when the file is loaded, so the result equals
    :func:`cascade_instance` up to floating-point round-off.
    """
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    t = sample_times(n_hours)
    write_samples_csv(d / "hydro_load.csv", t, hydro_area_load(t))
    write_samples_csv(d / "thermal_load.csv", t, thermal_area_load(t))
    text = system_text(cascade_instance(n_hours),
                       load_refs={"hydro": "hydro_load.csv", "thermal": "thermal_load.csv"})
    path = d / "system.txt"
    path.write_text(text)
    return path

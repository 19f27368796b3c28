import csv
import dataclasses

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from cthydro.analysis import (
    abs_integral_interval,
    compare,
    reduction,
    sample_grid,
    sample_schedule,
    structural_imbalance,
)
from cthydro.bernstein import BernsteinDomainError, PiecewisePoly, fit_samples
from cthydro.ctmodel import solve_ct
from cthydro.desk import thermal_only_instance
from cthydro.dtmodel import solve_dt
from cthydro.system import Area, Cable, SystemInstance, ThermalUnit
from oracles import bernstein_monomial_abs_integral

H = 3600.0
tau = sp.Symbol("tau")


def knots(n):
    return np.arange(n + 1) * H


def sympy_abs_integral(coeffs, delta):
    """Exact |p| integral: real roots in (0, 1) by sympy, then antiderivative differences."""
    c = [sp.Rational(x) for x in coeffs]
    d = len(c) - 1
    poly = sp.expand(sum(ci * sp.binomial(d, i) * tau**i * (1 - tau) ** (d - i) for i, ci in enumerate(c)))
    pts = [sp.Integer(0)]
    if poly != 0:
        pts += sorted(r for r in sp.Poly(poly, tau).real_roots() if 0 < r < 1)
    pts.append(sp.Integer(1))
    anti = sp.integrate(poly, tau)
    total = sum(abs(anti.subs(tau, b) - anti.subs(tau, a)) for a, b in zip(pts, pts[1:]))
    return float(sp.N(total * delta, 30))


# -- examples --------------------------------------------------------------------------------


def test_identical_schedule_is_zero():
    load = PiecewisePoly.from_coeffs(knots(2), [[1, 5, -2, 3], [3, 0, 4, 4]])
    assert structural_imbalance(load, load) == 0.0


def test_constant_gap():
    sched = PiecewisePoly.constant(knots(2), 10.0)
    ref = PiecewisePoly.constant(knots(2), 12.0)
    assert structural_imbalance(sched, ref) == pytest.approx(4.0, rel=1e-12)


def test_hourly_average_against_ramp_is_25_mwh():
    # closed form: two triangles of 0.5 * 50 MW * 0.5 h
    t = sp.Symbol("t")
    exact = sp.integrate(sp.Abs(50 - 100 * t), (t, 0, 1))
    assert exact == 25
    ramp = PiecewisePoly.from_coeffs(knots(1), [[0, 100 / 3, 200 / 3, 100]])
    avg = PiecewisePoly.constant(knots(1), 50.0)
    assert structural_imbalance(avg, ramp) == pytest.approx(25.0, rel=1e-12)


def test_ramp_samples_reference():
    t = np.arange(0, 3601, 300.0)
    samples = np.column_stack([t, 100 * t / H])
    avg = PiecewisePoly.constant(knots(1), 50.0)
    # the trapezoid rule is exact on each linear piece once the root at 1800 s is a grid point
    assert structural_imbalance(avg, samples) == pytest.approx(25.0, rel=1e-12)


def test_horizon_mismatch():
    a = PiecewisePoly.constant(knots(2), 1.0)
    b = PiecewisePoly.constant(knots(3), 1.0)
    with pytest.raises(BernsteinDomainError, match="horizon mismatch for area X"):
        structural_imbalance(a, b, "X")
    with pytest.raises(BernsteinDomainError, match="horizon mismatch"):
        structural_imbalance(a, np.array([[0.0, 1.0], [5 * H, 1.0]]))


def test_reduction_flags_zero_dt():
    assert reduction(0.0, 0.0) == (0.0, True)
    assert reduction(5.0, 10.0) == (0.5, False)


# -- quadrature against an exact oracle ------------------------------------------------------


def test_twenty_random_pairs_match_symbolic():
    rng = np.random.default_rng(7)
    for _ in range(20):
        a = np.round(rng.uniform(-50, 50, 4), 3)
        b = np.round(rng.uniform(-50, 50, 4), 3)
        delta = float(rng.choice([900.0, 1800.0, 3600.0]))
        got = structural_imbalance(PiecewisePoly.from_coeffs([0, delta], [a]),
                                   PiecewisePoly.from_coeffs([0, delta], [b]))
        exact = sympy_abs_integral([sp.Rational(str(x)) - sp.Rational(str(y)) for x, y in zip(a, b)], delta)
        assert got == pytest.approx(exact / 3600.0, rel=1e-8)


def test_degree_four_difference():
    # cubic schedule against a quartic reference
    sched = PiecewisePoly.from_coeffs([0, H], [[10, -5, 20, 0]])
    ref = PiecewisePoly.from_coeffs([0, H], [[0, 30, -10, 15, 5]])
    # elevated cubic coefficients: [c0, (c0 + 3 c1)/4, (c1 + c2)/2, (3 c2 + c3)/4, c3]
    c = [10, -5, 20, 0]
    up = [sp.Integer(c[0]), sp.Rational(c[0] + 3 * c[1], 4), sp.Rational(c[1] + c[2], 2),
          sp.Rational(3 * c[2] + c[3], 4), sp.Integer(c[3])]
    d = [u - r for u, r in zip(up, [0, 30, -10, 15, 5])]
    assert structural_imbalance(sched, ref) == pytest.approx(sympy_abs_integral(d, H) / H, rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-100, 100, allow_nan=False), min_size=4, max_size=4))
def test_interval_integral_matches_simpson(coeffs):
    got = abs_integral_interval(coeffs, 1.0)
    ref = bernstein_monomial_abs_integral(coeffs, 1.0)
    assert got == pytest.approx(ref, rel=1e-7, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.floats(-50, 50, allow_nan=False), min_size=8, max_size=8),
    st.lists(st.floats(-50, 50, allow_nan=False), min_size=8, max_size=8),
    st.floats(0.01, 100.0),
)
def test_scale_invariance(a, b, c):
    sched = PiecewisePoly.from_coeffs(knots(2), np.reshape(a, (2, 4)))
    ref = PiecewisePoly.from_coeffs(knots(2), np.reshape(b, (2, 4)))
    base = structural_imbalance(sched, ref)
    scaled = structural_imbalance(sched * c, ref * c)
    assert scaled == pytest.approx(c * base, rel=1e-9, abs=1e-9)
    flat = PiecewisePoly.constant(knots(2), 0.0)
    r1, _ = reduction(base, structural_imbalance(flat, ref) + 1.0)
    r2, _ = reduction(scaled, structural_imbalance(flat * c, ref * c) + c)
    assert r1 == pytest.approx(r2, rel=1e-9, abs=1e-12)


# -- compare ---------------------------------------------------------------------------------


def sinusoid_two_area(n_hours=4):
    """Two thermal areas joined by a cable, loads fitted to 5-minute sinusoids."""
    t = np.arange(0, n_hours * H + 1, 300.0)
    kn = knots(n_hours)
    la = fit_samples(np.column_stack([t, 60 + 25 * np.sin(2 * np.pi * t / (3 * H))]), kn, enforce_c1=True)
    lb = fit_samples(np.column_stack([t, 40 + 15 * np.cos(2 * np.pi * t / (5 * H))]), kn, enforce_c1=True)
    return SystemInstance(
        (H,) * n_hours, (Area("A", la), Area("B", lb)), (),
        thermal=(ThermalUnit("TA", "A", 0.0, 200.0, C=10.0, u_init=1),
                 ThermalUnit("TB", "B", 0.0, 200.0, C=25.0, u_init=1)),
        cables=(Cable("L", "A", "B", 20.0),),
    )


@pytest.fixture(scope="module")
def sinusoid_pair():
    inst = sinusoid_two_area()
    return inst, solve_ct(inst), solve_dt(inst)


def test_ct_reduces_imbalance_on_sinusoids(sinusoid_pair):
    _, ct, dt = sinusoid_pair
    rep = compare(ct, dt)
    assert rep.system.ct_mwh < rep.system.dt_mwh
    assert rep.system.reduction > 0
    for a in rep.areas:
        assert a.ct_mwh >= 0 and a.dt_mwh >= 0
        assert a.ct_mwh < a.dt_mwh
    assert rep.system.dt_mwh == pytest.approx(sum(a.dt_mwh for a in rep.areas))


def test_identical_schedules_give_zero_reduction(sinusoid_pair):
    _, ct, _ = sinusoid_pair
    rep = compare(ct, ct)
    for a in rep.areas + [rep.system]:
        assert a.ct_mwh == a.dt_mwh
        assert a.reduction == 0.0


def test_constant_load_flags_zero_dt():
    inst = thermal_only_instance(50.0)
    rep = compare(solve_ct(inst), solve_dt(inst))
    assert rep.system.dt_zero and rep.system.reduction == 0.0
    assert "true" in rep.text().splitlines()[3]


def test_report_fields_and_csv(tmp_path, sinusoid_pair):
    _, ct, dt = sinusoid_pair
    rep = compare(ct, dt)
    assert set(rep.sizes) == {"binary_variables", "continuous_variables", "constraints", "mip_gap", "wall_time_s"}
    assert rep.sizes["constraints"]["ct"] > rep.sizes["constraints"]["dt"]
    assert rep.cost_delta == pytest.approx(ct.objective - dt.objective)
    assert "wall_time_s" not in rep.text(with_timing=False)
    rep.write_csv(tmp_path / "imb.csv")
    rows = list(csv.reader(open(tmp_path / "imb.csv")))
    assert [r[0] for r in rows[1:]] == ["A", "B", "system"]


def test_sample_reference_option(sinusoid_pair):
    inst, ct, dt = sinusoid_pair
    t = np.arange(0, 4 * H + 1, 300.0)
    raw = {"A": np.column_stack([t, 60 + 25 * np.sin(2 * np.pi * t / (3 * H))]),
           "B": np.column_stack([t, 40 + 15 * np.cos(2 * np.pi * t / (5 * H))])}
    rep = compare(ct, dt, raw)
    assert rep.reference == "samples"
    assert rep.system.ct_mwh < rep.system.dt_mwh


# -- sampling --------------------------------------------------------------------------------


def test_fencepost():
    assert len(sample_grid(0.0, 24 * H, 300.0)) == 289
    g = sample_grid(0.0, 1000.0, 300.0)
    assert g[-1] == 1000.0 and len(g) == 5
    with pytest.raises(ValueError):
        sample_grid(0.0, 1.0, 0.0)


def read_col(path):
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["time_s", "value"]
    return np.array([[float(x) for x in r] for r in rows[1:]])


def test_sampled_files(tmp_path, cascade_ct, cascade):
    sched, _ = cascade_ct
    files = sample_schedule(sched, 300.0, tmp_path)
    names = {f.name for f in files}
    for expect in ("g_T1.csv", "v_R1.csv", "hydro_sum_hydro.csv", "thermal_sum_thermal.csv", "cable_flow_L1.csv"):
        assert expect in names
    assert len(read_col(tmp_path / "g_T1.csv")) == 6 * 12 + 1
    # aggregate equals the sum of its members (in memory; files carry 9 digits)
    t = sample_grid(0, 6 * H, 300.0)
    for a in cascade.areas:
        members = sum(sched.traj("p", p.id)(t) for p in cascade.plants_in(a.id))
        np.testing.assert_allclose(sched.hydro_sum(a.id)(t), members, atol=1e-9)
    hs = read_col(tmp_path / "hydro_sum_hydro.csv")[:, 1]
    parts = sum(read_col(tmp_path / f"p_{p.id}.csv")[:, 1] for p in cascade.plants_in("hydro"))
    np.testing.assert_allclose(hs, parts, rtol=1e-8, atol=1e-6)


def test_constant_schedule_gives_constant_column(tmp_path):
    sched = solve_dt(thermal_only_instance(50.0, n_hours=2))
    sample_schedule(sched, 600.0, tmp_path)
    col = read_col(tmp_path / "g_T1.csv")
    assert np.all(col[:, 1] == 50.0) and len(col) == 13


def test_dt_schedule_samples_as_steps(tmp_path, cascade_dt):
    sample_schedule(cascade_dt, 900.0, tmp_path)
    col = read_col(tmp_path / "g_T1.csv")
    vals = cascade_dt.traj("g", "T1").interval_means()
    np.testing.assert_allclose(col[1:4, 1], vals[0], rtol=1e-8)
    assert dataclasses.is_dataclass(cascade_dt)

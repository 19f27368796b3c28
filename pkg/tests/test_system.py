import dataclasses
import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cthydro.bernstein import PiecewisePoly
from cthydro.desk import cascade_instance, write_desk_case
from cthydro.system import (
    SINK,
    Area,
    Cable,
    DischargeSegment,
    HydroPlant,
    Reservoir,
    SystemInstance,
    SystemParseError,
    SystemValidationError,
    check_invariants,
    find_cycle,
    load_system,
    parse_system,
    system_text,
    validate_topology,
    write_system,
)

MINIMAL = """\
version = 1

[horizon]
intervals = 2
delta = 3600

[penalties]
bypass = 0.001
spill = 0.002

[areas]
id  load
N   40
S   -

[load]
area interval c0 c1 c2 c3
S    0        10 12 14 16
S    1        16 18 20 22

[reservoirs]
id  V_max  V_init  inflow  spill_to
R1  5e6    3e6     20      SINK

[plants]
id  reservoir  area  Q_d  Q_b  P_min  P_max  discharge_to  bypass_to
P1  R1         N     60   20   0      54     SINK          SINK

[segments]
plant index Q_s eta forbidden
P1    0     30  1.0 0
P1    1     30  0.8 0

[thermal]
id  area  G_min  G_max  C   C_up  C_down  R_u   R_d   R_up_gain  R_down_gain  u_init
T1  S     10     80     30  100   50      0.05  0.05  0.01       0.01         1

[cables]
id  from  to  F_max  R_u  R_d
L1  N     S   30     0.5  0.5

[cuts]
id  D     R1
K1  5e4   -0.01
"""


def write(tmp_path, text, name="sys.txt"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_minimal_file_counts(tmp_path):
    inst = load_system(write(tmp_path, MINIMAL))
    assert (len(inst.reservoirs), len(inst.plants), len(inst.thermal), len(inst.cables), len(inst.areas)) == \
        (1, 1, 1, 1, 2)
    assert inst.deltas == (3600.0, 3600.0)
    assert inst.area("N").load(1000.0) == pytest.approx(40.0, abs=1e-12)
    assert inst.area("S").load(3600.0) == 16.0
    assert inst.reservoir("R1").inflow == (20.0, 20.0)
    assert inst.cables[0].incidence("N") == 1 and inst.cables[0].incidence("S") == -1
    assert inst.cuts[0].coefficient("R1") == -0.01
    assert inst.cuts[0].coefficient("R9") == 0.0
    assert inst.thermal[0].cost_per_mws == pytest.approx(30 / 3600)


def test_v_init_above_v_max_names_reservoir(tmp_path):
    text = MINIMAL.replace("R1  5e6    3e6", "R1  5e6    6e6")
    with pytest.raises(SystemValidationError, match="reservoir R1"):
        load_system(write(tmp_path, text))


def test_cyclic_routing_lists_cycle(tmp_path):
    text = MINIMAL.replace("R1  5e6    3e6     20      SINK", "A  5e6    3e6     20      SINK\nB  5e6 3e6 0 SINK")
    text = text.replace("P1  R1         N     60   20   0      54     SINK          SINK",
                        "P1  A  N  60  20  0  54  B  SINK\nP2  B  N  60  20  0  54  A  SINK")
    text = text.replace("P1    1     30  0.8 0", "P1    1     30  0.8 0\nP2 0 30 1.0 0\nP2 1 30 0.8 0")
    text = text.replace("K1  5e4   -0.01", "K1  5e4   0")
    with pytest.raises(SystemValidationError) as exc:
        load_system(write(tmp_path, text))
    assert "topology cycle: A -> B -> A" in exc.value.diagnostics


def chain(n_res=3, n=24):
    knots = np.arange(n + 1) * 3600.0
    res = tuple(Reservoir(f"R{i}", 1e6, 5e5, (1.0,) * n, f"R{i + 1}" if i + 1 < n_res else SINK)
                for i in range(n_res))
    plants = tuple(
        HydroPlant(f"P{i}", f"R{i}", "A", 10.0, 5.0, 0.0, 10.0, (DischargeSegment(0, 10.0, 1.0),),
                   f"R{i + 1}" if i + 1 < n_res else SINK, SINK)
        for i in range(n_res)
    )
    return SystemInstance(tuple(np.diff(knots)), (Area("A", PiecewisePoly.constant(knots, 5.0)),), res, plants)


def test_three_reservoir_chain_is_clean():
    assert validate_topology(chain()) == []
    assert check_invariants(chain()) == []


def test_segment_sum_mismatch():
    inst = chain()
    p = dataclasses.replace(inst.plants[0], segments=(DischargeSegment(0, 9.0, 1.0),), P_max=9.0)
    inst = dataclasses.replace(inst, plants=(p,) + inst.plants[1:])
    diags = validate_topology(inst)
    assert any(d.startswith("segment sum mismatch") for d in diags)


def test_load_horizon_mismatch():
    inst = chain(n=24)
    short = PiecewisePoly.constant(np.arange(24) * 3600.0, 5.0)
    inst = dataclasses.replace(inst, areas=(Area("A", short),))
    assert any(d.startswith("horizon mismatch") for d in validate_topology(inst))


def test_other_diagnostics():
    inst = chain(n=2)
    bad = dataclasses.replace(
        inst,
        reservoirs=inst.reservoirs + (Reservoir("R0", 1.0, 2.0, (-1.0, 0.0), "NOWHERE"),),
        cables=(Cable("L", "A", "A", 1.0),),
    )
    diags = validate_topology(bad) + check_invariants(bad)
    text = "\n".join(diags)
    for fragment in ("duplicate reservoir id: R0", "unknown routing target", "connects area A to itself",
                     "V_init=2 outside", "negative inflow"):
        assert fragment in text


def test_plant_capacity_invariant_holds_on_desk():
    for p in cascade_instance().plants:
        assert abs(sum(s.Q_s for s in p.segments) - p.Q_d) <= 1e-9
        assert abs(sum(s.eta * s.Q_s for s in p.segments) - p.P_max) <= 1e-9


# -- cycle detection vs networkx -------------------------------------------------------------


@settings(max_examples=200)
@given(st.integers(1, 7).flatmap(
    lambda n: st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=12).map(
        lambda es: (n, es))))
def test_cycle_detection_matches_networkx(graph):
    n, es = graph
    edges = {f"N{i}": set() for i in range(n)}
    g = nx.DiGraph()
    g.add_nodes_from(edges)
    for a, b in es:
        edges[f"N{a}"].add(f"N{b}")
        g.add_edge(f"N{a}", f"N{b}")
    cycle = find_cycle(edges)
    assert (cycle is None) == nx.is_directed_acyclic_graph(g)
    if cycle:
        assert cycle[0] == cycle[-1]
        assert all(g.has_edge(a, b) for a, b in zip(cycle, cycle[1:]))


# -- round trip and parse errors ---------------------------------------------------------------


def assert_same_instance(a: SystemInstance, b: SystemInstance):
    for f in dataclasses.fields(SystemInstance):
        if f.name == "areas":
            continue
        assert getattr(a, f.name) == getattr(b, f.name), f.name
    assert [x.id for x in a.areas] == [x.id for x in b.areas]
    for x, y in zip(a.areas, b.areas):
        np.testing.assert_array_equal(x.load.knots, y.load.knots)
        np.testing.assert_array_equal(x.load.coeff_matrix(), y.load.coeff_matrix())


def test_round_trip_desk(tmp_path):
    inst = cascade_instance()
    write_system(inst, tmp_path / "s.txt")
    assert_same_instance(inst, load_system(tmp_path / "s.txt"))


def test_round_trip_minimal(tmp_path):
    inst = load_system(write(tmp_path, MINIMAL))
    assert_same_instance(inst, parse_system(system_text(inst)))


def test_desk_case_with_csv_loads(tmp_path):
    path = write_desk_case(tmp_path, n_hours=6)
    inst = load_system(path)
    ref = cascade_instance()
    for a, b in zip(inst.areas, ref.areas):
        np.testing.assert_allclose(a.load.coeff_matrix(), b.load.coeff_matrix(), atol=1e-9)
    assert inst.plants == ref.plants


def test_inflow_csv_is_interval_mean(tmp_path):
    t = np.arange(0, 7201, 300.0)
    (tmp_path / "in.csv").write_text("time_s,value\n" + "".join(
        f"{float(ti)!r},{10.0 if ti < 3600 else 30.0}\n" for ti in t))
    text = MINIMAL.replace("R1  5e6    3e6     20", "R1  5e6    3e6     in.csv")
    inst = load_system(write(tmp_path, text))
    assert inst.reservoir("R1").inflow == pytest.approx((10.0, 30.0))


@pytest.mark.parametrize(
    "old, new, match",
    [
        ("version = 1", "version = 7", "unsupported schema version"),
        ("delta = 3600", "delta = x", r"sys.txt:5: field 'delta'"),
        ("R1  5e6    3e6", "R1  big    3e6", r"sys.txt:\d+: .*V_max"),
        ("P1    0     30  1.0 0", "P1    0     30  1.0 2", "forbidden"),
        ("P1    0     30  1.0 0", "PX    0     30  1.0 0", "unknown plant"),
        ("[horizon]\nintervals = 2\ndelta = 3600", "", "missing \\[horizon\\]"),
    ],
)
def test_parse_errors_carry_location(tmp_path, old, new, match):
    assert old in MINIMAL
    with pytest.raises(SystemParseError, match=match):
        load_system(write(tmp_path, MINIMAL.replace(old, new)))


def test_missing_file(tmp_path):
    with pytest.raises(SystemParseError, match="cannot read"):
        load_system(tmp_path / "nope.txt")


def test_instance_is_immutable():
    inst = chain()
    with pytest.raises(dataclasses.FrozenInstanceError):
        inst.bypass_penalty = 1.0
    assert math.isinf(Cable("L", "A", "B", 1.0).R_u)

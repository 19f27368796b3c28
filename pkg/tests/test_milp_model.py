import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cthydro.milp import (
    BINARY,
    LinExpr,
    LpParseError,
    MilpModel,
    ModelError,
    lin_sum,
    lp_text,
    mps_text,
    parse_lp,
    parse_mps,
    read_model,
    write_lp,
    write_mps,
)
from oracles import read_lp_minimal


def small_model():
    m = MilpModel("demo")
    x = m.add_var("x", 0, 10)
    y = m.add_var("y", -math.inf, math.inf)
    z = m.add_var("z", 2, 2)
    w = m.add_binary("w")
    m.add_constraint(x + 2 * y - 0.5 * z, "<=", 7.25, "c1", "g1")
    m.add_constraint(x - 10 * w, "<=", 0, "c2", "g2")
    m.add_constraint(y + w, ">=", -3, "c3", "g2")
    m.add_constraint(x + y, "=", 1.5, "c4")
    m.set_objective(3 * x - y + 4 * w + 1.0)
    return m


# -- construction ------------------------------------------------------------------


def test_binary_listed_in_binaries_section():
    m = MilpModel()
    w = m.add_binary("w")
    m.add_constraint(w, "<=", 1)
    text = lp_text(m)
    assert "Binaries\n w\n" in text
    assert read_lp_minimal(text)["binaries"] == {"w"}


def test_fixed_bound_serialized():
    m = MilpModel()
    x = m.add_var("x", 2, 2)
    m.set_objective(x)
    assert " x = 2\n" in lp_text(m)
    assert " FX BND       x" in mps_text(m)


def test_vacuous_constraint_flagged():
    m = MilpModel()
    m.add_var("x")
    idx = m.add_constraint(LinExpr(), "<=", 0.0, "empty")
    assert m.constraints[idx].vacuous
    assert any("vacuous constraint empty" in d for d in m.diagnostics)
    assert "empty" not in lp_text(m)
    m.add_constraint(LinExpr(), ">=", 1.0, "bad")
    assert "(violated)" in m.diagnostics[-1]


def test_one_variable_lp_text():
    m = MilpModel("one")
    x = m.add_var("x")
    m.add_constraint(x, ">=", 1, "r1")
    m.set_objective(x)
    assert lp_text(m) == (
        "\\ Model one\nMinimize\n obj: + x\nSubject To\n r1: + x >= 1\nBounds\nEnd\n"
    )


def test_duplicate_and_malformed_names():
    m = MilpModel()
    x = m.add_var("x")
    with pytest.raises(ModelError, match="duplicate"):
        m.add_var("x")
    m.add_constraint(x, "<=", 1, "c")
    with pytest.raises(ModelError, match="duplicate"):
        m.add_constraint(x, "<=", 2, "c")
    for bad in ("1x", "a-b", "e12", "", "x" * 256):
        with pytest.raises(ModelError):
            m.add_var(bad)
    m.add_var("x" * 255)


def test_unregistered_variable_rejected():
    a, b = MilpModel("a"), MilpModel("b")
    x = a.add_var("x")
    b.add_var("x")
    with pytest.raises(ModelError, match="not registered"):
        b.add_constraint(x, "<=", 1)
    with pytest.raises(ModelError, match="not registered"):
        b.set_objective(x)


def test_bound_invariants():
    m = MilpModel()
    with pytest.raises(ModelError):
        m.add_var("x", 3, 1)
    w = m.add_var("w", -5, 7, BINARY)
    assert (w.lo, w.hi) == (0.0, 1.0)
    with pytest.raises(ModelError):
        m.add_constraint(w, "<>", 1)


def test_linexpr_normalization_and_arithmetic():
    m = MilpModel()
    x, y = m.add_var("x"), m.add_var("y")
    e = (x + y - y) * 2 + 3
    assert e.normalized().terms == {x: 2.0}
    assert e.constant == 3.0
    assert (5 - x).evaluate({"x": 2}) == 3.0
    assert lin_sum([x, y, 1.0, x]).terms == {x: 2.0, y: 1.0}
    m.add_constraint(x + y - y, "<=", 1, "c")
    assert set(m.constraints[0].expr.terms) == {x}


def test_constants_move_to_rhs():
    m = MilpModel()
    x = m.add_var("x")
    m.add_constraint(x + 5, "<=", 2 * x + 1, "c")
    con = m.constraints[0]
    assert con.expr.terms == {x: -1.0}
    assert con.rhs == -4.0


def test_counts_and_groups():
    m = small_model()
    assert m.counts() == {"binary": 1, "continuous": 3, "constraints": 4}
    assert m.group_counts() == {"g1": 1, "g2": 2, "": 1}


def test_to_arrays():
    arr = small_model().to_arrays()
    assert arr.names == ["x", "y", "z", "w"]
    np.testing.assert_array_equal(arr.c, [3, -1, 0, 4])
    assert arr.obj_constant == 1.0
    np.testing.assert_array_equal(arr.integrality, [0, 0, 0, 1])
    np.testing.assert_array_equal(arr.A.toarray()[0], [1, 2, -0.5, 0])
    assert arr.row_lo[2] == -3 and arr.row_hi[2] == np.inf
    assert arr.row_lo[3] == arr.row_hi[3] == 1.5


def test_elastic_copy_and_bounds_override():
    m = small_model()
    e, groups = m.elastic_copy(100.0)
    assert set(groups.values()) == {"g1", "g2", ""}
    assert len(groups) == 5  # the equality row gets two slacks
    b = m.with_bounds({"x": (1, 1)})
    assert b.var("x").lo == b.var("x").hi == 1.0
    assert m.var("x").hi == 10.0


def test_max_violation():
    m = small_model()
    vals = {"x": 1, "y": 0.5, "z": 2, "w": 1}
    assert m.max_violation(vals) == pytest.approx(0.0)
    vals["x"] = 11
    assert m.max_violation(vals) == pytest.approx(10.0)  # equality row c4


# -- serialization -----------------------------------------------------------------------


def test_lp_determinism(tmp_path):
    write_lp(small_model(), tmp_path / "a.lp")
    write_lp(small_model(), tmp_path / "b.lp")
    assert (tmp_path / "a.lp").read_bytes() == (tmp_path / "b.lp").read_bytes()
    write_mps(small_model(), tmp_path / "a.mps")
    write_mps(small_model(), tmp_path / "b.mps")
    assert (tmp_path / "a.mps").read_bytes() == (tmp_path / "b.mps").read_bytes()


def _same_model(a: MilpModel, b: MilpModel, ordered: bool = True):
    # LP text declares columns by first use, so only MPS keeps their order
    if ordered:
        assert [v.name for v in a.variables] == [v.name for v in b.variables]
    assert sorted(v.name for v in a.variables) == sorted(v.name for v in b.variables)
    for va in a.variables:
        vb = b.var(va.name)
        assert (va.kind, va.lo, va.hi) == (vb.kind, vb.lo, vb.hi), va.name
    live = [c for c in a.constraints if not c.vacuous]
    assert [c.name for c in live] == [c.name for c in b.constraints]
    for ca, cb in zip(live, b.constraints):
        assert ca.sense == cb.sense and ca.rhs == cb.rhs
        assert {v.name: k for v, k in ca.expr.terms.items()} == {v.name: k for v, k in cb.expr.terms.items()}
    assert {v.name: k for v, k in a.objective.terms.items()} == {v.name: k for v, k in b.objective.terms.items()}
    assert a.objective.constant == b.objective.constant


def test_lp_round_trip_with_package_reader():
    m = small_model()
    _same_model(m, parse_lp(lp_text(m)), ordered=False)


def test_mps_round_trip():
    m = small_model()
    _same_model(m, parse_mps(mps_text(m)))


def test_read_model_dispatches_on_suffix(tmp_path):
    m = small_model()
    write_mps(m, tmp_path / "m.mps")
    write_lp(m, tmp_path / "m.lp")
    _same_model(read_model(tmp_path / "m.mps"), read_model(tmp_path / "m.lp"), ordered=False)


def test_lp_reader_rejects_unsupported():
    with pytest.raises(LpParseError, match="maximization"):
        parse_lp("Maximize\n obj: x\nSubject To\n c: x <= 1\nEnd\n")
    with pytest.raises(LpParseError):
        parse_lp("x + y\n")


names = st.from_regex(r"[vxyz_][a-z0-9_]{0,6}", fullmatch=True)
coefs = st.one_of(st.integers(-50, 50).map(float), st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False))


@st.composite
def random_models(draw):
    m = MilpModel("rnd")
    vnames = draw(st.lists(names, min_size=1, max_size=6, unique=True))
    for n in vnames:
        kind = draw(st.sampled_from(["c", "b", "free", "fixed", "box"]))
        if kind == "b":
            m.add_binary(n)
        elif kind == "free":
            m.add_var(n, -math.inf, math.inf)
        elif kind == "fixed":
            v = draw(coefs)
            m.add_var(n, v, v)
        elif kind == "box":
            lo = draw(coefs)
            m.add_var(n, lo, lo + draw(st.floats(0.001, 100)))
        else:
            m.add_var(n)
    for i in range(draw(st.integers(0, 5))):
        picked = draw(st.lists(st.sampled_from(m.variables), min_size=1, max_size=4, unique_by=lambda v: v.name))
        expr = lin_sum(draw(coefs) * v for v in picked)
        m.add_constraint(expr, draw(st.sampled_from(["<=", ">=", "="])), draw(coefs), f"r{i}", "g")
    m.set_objective(lin_sum(draw(coefs) * v for v in m.variables) + draw(coefs))
    return m


@settings(max_examples=60, deadline=None)
@given(random_models())
def test_serialized_model_matches_independent_reader(m):
    parsed = read_lp_minimal(lp_text(m))
    live = [c for c in m.constraints if not c.vacuous]
    assert list(parsed["rows"]) == [c.name for c in live]
    for c in live:
        terms, sense, rhs = parsed["rows"][c.name]
        assert sense == c.sense and rhs == c.rhs
        assert terms == {v.name: k for v, k in c.expr.terms.items()}
    for v in m.variables:
        if v.name in parsed["bounds"]:
            assert parsed["bounds"][v.name] == (v.lo, v.hi), v.name
    assert parsed["binaries"] == {v.name for v in m.variables if v.kind == BINARY}
    # an empty objective is written as "+ 0 <first var>"
    assert {k: c for k, c in parsed["objective"].items() if c} == {v.name: k for v, k in m.objective.terms.items()}


@settings(max_examples=60, deadline=None)
@given(random_models())
def test_random_round_trips(m):
    _same_model(m, parse_lp(lp_text(m)), ordered=False)
    _same_model(m, parse_mps(mps_text(m)))

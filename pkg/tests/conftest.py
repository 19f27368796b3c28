import itertools
import time

import numpy as np
import pytest
from scipy.optimize import linprog

from cthydro.ctmodel import CtBuilder, solve_ct
from cthydro.desk import cascade_instance
from cthydro.dtmodel import solve_dt


@pytest.fixture(autouse=True)
def _default_solver(monkeypatch):
    monkeypatch.delenv("CT_SOLVER", raising=False)


@pytest.fixture(scope="session")
def cascade():
    return cascade_instance()


@pytest.fixture(scope="session")
def cascade_ct(cascade):
    t0 = time.perf_counter()
    sched = solve_ct(cascade)
    return sched, time.perf_counter() - t0


@pytest.fixture(scope="session")
def cascade_dt(cascade):
    return solve_dt(cascade)


@pytest.fixture(scope="session")
def cascade_ct_dropped(cascade):
    t0 = time.perf_counter()
    sched = solve_ct(cascade, drop_hydro_continuity=True)
    return sched, time.perf_counter() - t0


def lp_with_fixed(model, fixed: dict[str, float]):
    """Solve the LP left after fixing binaries, straight from the matrix form.

    Uses scipy's LP interface in-process (no files, no driver), so it is an
    independent route from the subprocess MILP solve.  Returns the objective
    including the constant, or None if infeasible.
    """
    arr = model.to_arrays()
    lo, hi = arr.lo.copy(), arr.hi.copy()
    for i, name in enumerate(arr.names):
        if name in fixed:
            lo[i] = hi[i] = fixed[name]
    A = arr.A.tocsr()
    eq = arr.row_lo == arr.row_hi
    le = np.isfinite(arr.row_hi) & ~eq
    ge = np.isfinite(arr.row_lo) & ~eq
    from scipy import sparse

    A_ub = sparse.vstack([A[le], -A[ge]])
    b_ub = np.concatenate([arr.row_hi[le], -arr.row_lo[ge]])
    res = linprog(arr.c, A_ub=A_ub, b_ub=b_ub, A_eq=A[eq], b_eq=arr.row_lo[eq],
                  bounds=list(zip(lo, hi)), method="highs")
    if res.status == 2:
        return None
    assert res.status == 0, res.message
    return float(res.fun) + arr.obj_constant


def enumerate_binaries(model, prefilter=True):
    """Brute-force MILP optimum: every binary pattern, one LP each.

    Patterns violating a row that involves only binaries are skipped
    before the LP (exact, since such rows do not depend on continuous
    values).  Returns (best objective, best pattern, number of LPs solved).
    """
    arr = model.to_arrays()
    bidx = [i for i, k in enumerate(arr.integrality) if k]
    free = [i for i in bidx if arr.lo[i] != arr.hi[i]]
    fixed_bins = {arr.names[i]: arr.lo[i] for i in bidx if arr.lo[i] == arr.hi[i]}
    A = arr.A.tocsr()
    bset = set(bidx)
    bin_rows = [r for r in range(A.shape[0])
                if A.indptr[r + 1] > A.indptr[r] and set(A.indices[A.indptr[r]:A.indptr[r + 1]]) <= bset]
    best, best_pat, n_lp = None, None, 0
    for pattern in itertools.product([0.0, 1.0], repeat=len(free)):
        x = np.zeros(len(arr.names))
        for i, v in zip(free, pattern):
            x[i] = v
        for name, v in fixed_bins.items():
            x[arr.names.index(name)] = v
        if prefilter and bin_rows:
            ax = A[bin_rows] @ x
            if np.any(ax > arr.row_hi[bin_rows] + 1e-9) or np.any(ax < arr.row_lo[bin_rows] - 1e-9):
                continue
        fixed = {arr.names[i]: x[i] for i in bidx}
        n_lp += 1
        val = lp_with_fixed(model, fixed)
        if val is not None and (best is None or val < best - 1e-12):
            best, best_pat = val, fixed
    return best, best_pat, n_lp


@pytest.fixture
def builder_of():
    def make(instance, **kw):
        b = CtBuilder(instance, **kw)
        b.build()
        return b
    return make


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(mod.RESULTS):
            terminalreporter.write_line(mod.RESULTS[k])

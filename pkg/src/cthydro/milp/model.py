"""In-memory MILP: variables, linear expressions, constraints, objective."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

CONTINUOUS = "continuous"
BINARY = "binary"

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_EXPONENT_LIKE = re.compile(r"^[eE][0-9eE]")
MAX_NAME_LEN = 255

_SENSES = {"<=": "<=", "=<": "<=", ">=": ">=", "=>": ">=", "=": "=", "==": "="}


class ModelError(ValueError):
    """Invalid model construction (duplicate or malformed name, foreign variable)."""


def check_name(name: str) -> str:
    if not isinstance(name, str) or not _NAME_RE.match(name):
        raise ModelError(f"invalid name {name!r}: use letters, digits and underscore")
    if len(name) > MAX_NAME_LEN:
        raise ModelError(f"name longer than {MAX_NAME_LEN} characters: {name[:40]}...")
    if _EXPONENT_LIKE.match(name):
        # LP readers take 'e1...' as an exponent
        raise ModelError(f"name {name!r} reads as an exponent in LP files")
    return name


class _Arith:
    """Arithmetic shared by Var and LinExpr; everything lands in a LinExpr."""

    def _as_expr(self) -> "LinExpr":
        raise NotImplementedError

    def __add__(self, other):
        out = self._as_expr().copy()
        out._iadd(other, 1.0)
        return out

    __radd__ = __add__

    def __sub__(self, other):
        out = self._as_expr().copy()
        out._iadd(other, -1.0)
        return out

    def __rsub__(self, other):
        out = self._as_expr() * -1.0
        out._iadd(other, 1.0)
        return out

    def __mul__(self, k):
        if not isinstance(k, (int, float, np.floating, np.integer)):
            return NotImplemented
        k = float(k)
        e = self._as_expr()
        return LinExpr({v: c * k for v, c in e.terms.items()}, e.constant * k)

    __rmul__ = __mul__

    def __truediv__(self, k):
        return self * (1.0 / float(k))

    def __neg__(self):
        return self * -1.0


@dataclass(eq=False)
class Var(_Arith):
    index: int
    name: str
    kind: str = CONTINUOUS
    lo: float = 0.0
    hi: float = math.inf
    tags: tuple = ()

    def _as_expr(self):
        return LinExpr({self: 1.0})

    def __repr__(self):
        return f"Var({self.name})"

    __hash__ = object.__hash__


class LinExpr(_Arith):
    __slots__ = ("terms", "constant")

    def __init__(self, terms: Mapping[Var, float] | None = None, constant: float = 0.0):
        self.terms: dict[Var, float] = dict(terms) if terms else {}
        self.constant = float(constant)

    def _as_expr(self):
        return self

    def copy(self) -> "LinExpr":
        return LinExpr(self.terms, self.constant)

    def _iadd(self, other, sign: float) -> None:
        if isinstance(other, Var):
            self.terms[other] = self.terms.get(other, 0.0) + sign
        elif isinstance(other, LinExpr):
            for v, c in other.terms.items():
                self.terms[v] = self.terms.get(v, 0.0) + sign * c
            self.constant += sign * other.constant
        elif isinstance(other, (int, float, np.floating, np.integer)):
            self.constant += sign * float(other)
        else:
            raise TypeError(f"cannot combine LinExpr with {type(other).__name__}")

    def add_term(self, var: Var, coef: float) -> "LinExpr":
        self.terms[var] = self.terms.get(var, 0.0) + float(coef)
        return self

    def normalized(self) -> "LinExpr":
        return LinExpr({v: c for v, c in self.terms.items() if c != 0.0}, self.constant)

    def evaluate(self, values: Mapping[str, float]) -> float:
        return self.constant + sum(c * values.get(v.name, 0.0) for v, c in self.terms.items())

    def __repr__(self):
        parts = [f"{c:+g}*{v.name}" for v, c in self.terms.items()]
        if self.constant:
            parts.append(f"{self.constant:+g}")
        return "LinExpr(" + " ".join(parts or ["0"]) + ")"


def lin_sum(items: Iterable) -> LinExpr:
    out = LinExpr()
    for it in items:
        out._iadd(it, 1.0)
    return out


def as_expr(x) -> LinExpr:
    if isinstance(x, LinExpr):
        return x
    if isinstance(x, Var):
        return x._as_expr()
    return LinExpr(constant=float(x))


@dataclass
class Constraint:
    index: int
    name: str
    expr: LinExpr
    sense: str
    rhs: float
    group: str = ""

    @property
    def vacuous(self) -> bool:
        return not self.expr.terms

    def violation(self, values: Mapping[str, float]) -> float:
        lhs = self.expr.evaluate(values)
        if self.sense == "<=":
            return max(0.0, lhs - self.rhs)
        if self.sense == ">=":
            return max(0.0, self.rhs - lhs)
        return abs(lhs - self.rhs)


@dataclass
class ModelArrays:
    """Dense-ordered matrix form: min c.x s.t. row_lo <= A x <= row_hi, lo <= x <= hi."""

    c: np.ndarray
    A: "object"  # scipy.sparse.csr_matrix
    row_lo: np.ndarray
    row_hi: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    integrality: np.ndarray
    names: list[str]
    obj_constant: float


class MilpModel:
    """Minimization MILP with continuous and binary variables.

    Insertion order of variables and constraints is preserved and drives the
    order of every serialized form.
    """

    def __init__(self, name: str = "model"):
        self.name = name
        self.variables: list[Var] = []
        self.constraints: list[Constraint] = []
        self.objective = LinExpr()
        self.diagnostics: list[str] = []
        self._by_name: dict[str, Var] = {}
        self._con_names: dict[str, int] = {}

    # -- building -----------------------------------------------------------
    def add_var(
        self,
        name: str,
        lo: float = 0.0,
        hi: float = math.inf,
        kind: str = CONTINUOUS,
        tags: tuple = (),
    ) -> Var:
        check_name(name)
        if name in self._by_name:
            raise ModelError(f"duplicate variable name {name!r}")
        if kind not in (CONTINUOUS, BINARY):
            raise ModelError(f"unknown variable kind {kind!r}")
        lo, hi = float(lo), float(hi)
        if kind == BINARY:
            lo, hi = max(lo, 0.0), min(hi, 1.0)
        if lo > hi:
            raise ModelError(f"variable {name}: lower bound {lo} above upper bound {hi}")
        var = Var(len(self.variables), name, kind, lo, hi, tuple(tags))
        self.variables.append(var)
        self._by_name[name] = var
        return var

    def add_binary(self, name: str, tags: tuple = ()) -> Var:
        return self.add_var(name, 0.0, 1.0, BINARY, tags)

    def var(self, name: str) -> Var:
        return self._by_name[name]

    def has_var(self, name: str) -> bool:
        return name in self._by_name

    def _check_registered(self, expr: LinExpr) -> None:
        for v in expr.terms:
            if v.index >= len(self.variables) or self.variables[v.index] is not v:
                raise ModelError(f"variable {v.name!r} is not registered in model {self.name!r}")

    def add_constraint(self, lhs, sense: str, rhs=0.0, name: str | None = None, group: str = "") -> int:
        if sense not in _SENSES:
            raise ModelError(f"unknown constraint sense {sense!r}")
        expr = as_expr(lhs) - as_expr(rhs)
        self._check_registered(expr)
        expr = expr.normalized()
        bound = -expr.constant + 0.0
        expr.constant = 0.0
        idx = len(self.constraints)
        if name is None:
            name = f"R{idx}"
            while name in self._con_names:
                name += "_"
        check_name(name)
        if name in self._con_names:
            raise ModelError(f"duplicate constraint name {name!r}")
        con = Constraint(idx, name, expr, _SENSES[sense], bound, group)
        if con.vacuous:
            ok = con.violation({}) == 0.0
            self.diagnostics.append(
                f"vacuous constraint {name}: 0 {con.sense} {bound!r}"
                + ("" if ok else " (violated)")
            )
        self.constraints.append(con)
        self._con_names[name] = idx
        return idx

    def set_objective(self, expr) -> None:
        expr = as_expr(expr)
        self._check_registered(expr)
        self.objective = expr.normalized()

    # -- inspection ---------------------------------------------------------
    @property
    def n_binary(self) -> int:
        return sum(1 for v in self.variables if v.kind == BINARY)

    @property
    def n_continuous(self) -> int:
        return sum(1 for v in self.variables if v.kind == CONTINUOUS)

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)

    def counts(self) -> dict[str, int]:
        return {
            "binary": self.n_binary,
            "continuous": self.n_continuous,
            "constraints": self.n_constraints,
        }

    def group_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for c in self.constraints:
            out[c.group] = out.get(c.group, 0) + 1
        return out

    def tag_map(self) -> dict[str, tuple]:
        return {v.name: v.tags for v in self.variables}

    def to_arrays(self) -> ModelArrays:
        from scipy import sparse

        n = len(self.variables)
        c = np.zeros(n)
        for v, k in self.objective.terms.items():
            c[v.index] += k
        rows, cols, vals = [], [], []
        row_lo = np.empty(len(self.constraints))
        row_hi = np.empty(len(self.constraints))
        for i, con in enumerate(self.constraints):
            for v, k in con.expr.terms.items():
                rows.append(i)
                cols.append(v.index)
                vals.append(k)
            row_lo[i] = -np.inf if con.sense == "<=" else con.rhs
            row_hi[i] = np.inf if con.sense == ">=" else con.rhs
        A = sparse.csr_matrix((vals, (rows, cols)), shape=(len(self.constraints), n))
        return ModelArrays(
            c=c,
            A=A,
            row_lo=row_lo,
            row_hi=row_hi,
            lo=np.array([v.lo for v in self.variables]),
            hi=np.array([v.hi for v in self.variables]),
            integrality=np.array([1 if v.kind == BINARY else 0 for v in self.variables]),
            names=[v.name for v in self.variables],
            obj_constant=self.objective.constant,
        )

    def max_violation(self, values: Mapping[str, float]) -> float:
        worst = 0.0
        for con in self.constraints:
            worst = max(worst, con.violation(values))
        for v in self.variables:
            x = values.get(v.name, 0.0)
            worst = max(worst, v.lo - x, x - v.hi)
        return worst

    # -- derived models -------------------------------------------------------
    def elastic_copy(self, weight: float = 1e6) -> tuple["MilpModel", dict[str, str]]:
        """Copy with non-negative slacks on every constraint, penalized by ``weight``.

        Returns the relaxed model and a map slack-name -> constraint group.
        """
        out = MilpModel(self.name + "_elastic")
        mapping = {}
        for v in self.variables:
            mapping[v] = out.add_var(v.name, v.lo, v.hi, v.kind, v.tags)
        obj = LinExpr({mapping[v]: c for v, c in self.objective.terms.items()},
                      self.objective.constant)
        slack_group: dict[str, str] = {}
        for con in self.constraints:
            expr = LinExpr({mapping[v]: c for v, c in con.expr.terms.items()})
            if con.sense in ("<=", "="):
                s = out.add_var(f"slk_dn_{con.name}", tags=("slack", con.group))
                expr.add_term(s, -1.0)
                obj.add_term(s, weight)
                slack_group[s.name] = con.group
            if con.sense in (">=", "="):
                s = out.add_var(f"slk_up_{con.name}", tags=("slack", con.group))
                expr.add_term(s, 1.0)
                obj.add_term(s, weight)
                slack_group[s.name] = con.group
            out.add_constraint(expr, con.sense, con.rhs, con.name, con.group)
        out.set_objective(obj)
        return out, slack_group

    def with_bounds(self, overrides: Mapping[str, tuple[float, float]]) -> "MilpModel":
        """Copy of the model with some variable bounds replaced."""
        out = MilpModel(self.name)
        mapping = {}
        for v in self.variables:
            lo, hi = overrides.get(v.name, (v.lo, v.hi))
            mapping[v] = out.add_var(v.name, lo, hi, v.kind, v.tags)
        for con in self.constraints:
            expr = LinExpr({mapping[v]: c for v, c in con.expr.terms.items()})
            out.add_constraint(expr, con.sense, con.rhs, con.name, con.group)
        out.set_objective(
            LinExpr({mapping[v]: c for v, c in self.objective.terms.items()},
                    self.objective.constant)
        )
        out.diagnostics = list(self.diagnostics)
        return out

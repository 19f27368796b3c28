"""LP and MPS text serialization of :class:`MilpModel`, plus matching readers.

The writers are deterministic: identical models give byte-identical files.
A non-zero objective constant is not representable in every reader's
dialect, so it is written as a comment and restored by our readers.
"""

from __future__ import annotations

import math
import re
from pathlib import Path

from .model import BINARY, CONTINUOUS, LinExpr, MilpModel

LINE_WIDTH = 200
_CONST_TAG = "objective constant:"


class LpParseError(ValueError):
    pass


def fmt_num(x: float) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _term_strings(expr: LinExpr) -> list[str]:
    out = []
    for v, c in expr.terms.items():
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        out.append(f"{sign} {v.name}" if mag == 1.0 else f"{sign} {fmt_num(mag)} {v.name}")
    return out


def _wrap(head: str, parts: list[str]) -> list[str]:
    lines, cur = [], head
    for p in parts:
        if len(cur) + 1 + len(p) > LINE_WIDTH and cur.strip():
            lines.append(cur)
            cur = "   " + p
        else:
            cur = cur + " " + p if cur else p
    lines.append(cur)
    return lines


def lp_text(model: MilpModel) -> str:
    lines = [f"\\ Model {model.name}"]
    if model.objective.constant:
        lines.append(f"\\ {_CONST_TAG} {fmt_num(model.objective.constant)}")
    lines.append("Minimize")
    obj_terms = _term_strings(model.objective)
    if not obj_terms and model.variables:
        obj_terms = [f"+ 0 {model.variables[0].name}"]
    lines += _wrap(" obj:", obj_terms)
    lines.append("Subject To")
    referenced = set(model.objective.terms)
    for con in model.constraints:
        if con.vacuous:
            continue
        referenced.update(con.expr.terms)
        parts = _term_strings(con.expr) + [con.sense, fmt_num(con.rhs)]
        lines += _wrap(f" {con.name}:", parts)
    lines.append("Bounds")
    for v in model.variables:
        b = _bound_line(v, v in referenced)
        if b:
            lines.append(" " + b)
    bins = [v.name for v in model.variables if v.kind == BINARY]
    if bins:
        lines.append("Binaries")
        lines += _wrap("", [" " + bins[0]] + bins[1:])
    lines.append("End")
    return "\n".join(lines) + "\n"


def _bound_line(v, referenced: bool) -> str | None:
    lo, hi = v.lo, v.hi
    if v.kind == BINARY:
        if lo == 0.0 and hi == 1.0:
            return None if referenced else f"0 <= {v.name} <= 1"
    if lo == hi:
        return f"{v.name} = {fmt_num(lo)}"
    if math.isinf(lo) and math.isinf(hi):
        return f"{v.name} free"
    if math.isinf(hi):
        if lo == 0.0 and referenced:
            return None
        return f"{v.name} >= {fmt_num(lo)}"
    return f"{fmt_num(lo)} <= {v.name} <= {fmt_num(hi)}"


def write_lp(model: MilpModel, path: str | Path) -> None:
    Path(path).write_text(lp_text(model))


# -- LP reader -----------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(<=|>=|=<|=>|<|>|=|:|\+|-|(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|[A-Za-z_][\w.\[\]]*)"
)
_SECTION_RE = re.compile(
    r"^\s*(minimize|minimise|minimum|min|maximize|maximise|maximum|max|subject\s+to|such\s+that|"
    r"s\.t\.|st|bounds?|binary|binaries|bin|generals?|gen|integers?|end)\s*$",
    re.IGNORECASE,
)
_NUM_RE = re.compile(r"^(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?$")
_SENSE_MAP = {"<=": "<=", "=<": "<=", "<": "<=", ">=": ">=", "=>": ">=", ">": ">=", "=": "="}


def _tokens(text: str) -> list[str]:
    toks, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise LpParseError(f"unexpected text near {text[pos:pos + 30]!r}")
        toks.append(m.group(1))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return toks


def _parse_number(tok: str) -> float:
    low = tok.lower()
    if low in ("inf", "infinity"):
        return math.inf
    if not _NUM_RE.match(tok):
        raise LpParseError(f"expected a number, got {tok!r}")
    return float(tok)


def _section_key(word: str) -> str:
    w = re.sub(r"\s+", " ", word.lower())
    if w.startswith("min"):
        return "min"
    if w.startswith("max"):
        return "max"
    if w in ("subject to", "such that", "s.t.", "st"):
        return "st"
    if w.startswith("bound"):
        return "bounds"
    if w.startswith("bin"):
        return "bin"
    if w.startswith("gen") or w.startswith("int"):
        return "gen"
    return "end"


def read_lp(path: str | Path) -> MilpModel:
    return parse_lp(Path(path).read_text(), name=Path(path).stem)


def parse_lp(text: str, name: str = "model") -> MilpModel:
    sections: dict[str, list[str]] = {}
    order: list[str] = []
    current = None
    constant = 0.0
    for raw in text.splitlines():
        if raw.lstrip().startswith("\\"):
            body = raw.lstrip()[1:].strip()
            if body.startswith(_CONST_TAG):
                constant = float(body[len(_CONST_TAG):].strip())
            elif body.startswith("Model "):
                name = body[6:].strip() or name
            continue
        line = raw.split("\\", 1)[0]
        if not line.strip():
            continue
        m = _SECTION_RE.match(line)
        if m:
            current = _section_key(m.group(1))
            if current == "end":
                break
            sections.setdefault(current, [])
            order.append(current)
            continue
        if current is None:
            raise LpParseError(f"content before the objective section: {line.strip()!r}")
        sections[current].append(line)
    if "max" in sections:
        raise LpParseError("maximization models are not supported")
    if sections.get("gen"):
        raise LpParseError("general integer variables are not supported")

    model = MilpModel(name)
    kinds: dict[str, str] = {}
    for line in sections.get("bin", []):
        for tok in line.split():
            kinds[tok] = BINARY

    def var_of(vname: str):
        if not model.has_var(vname):
            kind = kinds.get(vname, CONTINUOUS)
            model.add_var(vname, 0.0, 1.0 if kind == BINARY else math.inf, kind)
        return model.var(vname)

    obj_toks = _tokens(" ".join(sections.get("min", [])))
    if len(obj_toks) >= 2 and obj_toks[1] == ":":
        obj_toks = obj_toks[2:]
    obj, end = _parse_terms(obj_toks, 0, var_of)
    if end != len(obj_toks):
        raise LpParseError(f"trailing tokens in objective: {obj_toks[end:end + 5]}")
    obj.constant += constant

    toks = _tokens(" ".join(sections.get("st", [])))
    pending = []
    i = 0
    while i < len(toks):
        cname = None
        if i + 1 < len(toks) and toks[i + 1] == ":":
            cname = toks[i]
            i += 2
        expr, i = _parse_terms(toks, i, var_of)
        if i >= len(toks) or toks[i] not in _SENSE_MAP:
            raise LpParseError(f"constraint {cname}: missing sense")
        sense = _SENSE_MAP[toks[i]]
        i += 1
        sign = 1.0
        while toks[i] in ("+", "-"):
            sign *= -1.0 if toks[i] == "-" else 1.0
            i += 1
        rhs = sign * _parse_number(toks[i])
        i += 1
        pending.append((cname, expr, sense, rhs))

    for line in sections.get("bounds", []):
        _apply_bound(_tokens(line), var_of)
    for line in sections.get("bin", []):
        for tok in line.split():
            var_of(tok)

    for cname, expr, sense, rhs in pending:
        model.add_constraint(expr, sense, rhs, name=cname)
    model.set_objective(obj)
    return model


def _parse_terms(toks, i, var_of):
    """Parse a linear expression starting at ``toks[i]``; return (expr, next index)."""
    expr = LinExpr()
    n = len(toks)
    while i < n:
        sign = 1.0
        saw_sign = False
        while i < n and toks[i] in ("+", "-"):
            sign *= -1.0 if toks[i] == "-" else 1.0
            saw_sign = True
            i += 1
        if i >= n:
            raise LpParseError("dangling sign")
        tok = toks[i]
        if tok in _SENSE_MAP:
            if saw_sign:
                raise LpParseError("sign before relational operator")
            break
        if i + 1 < n and toks[i + 1] == ":":
            break
        if _NUM_RE.match(tok):
            coef = float(tok)
            nxt = toks[i + 1] if i + 1 < n else None
            if nxt is None or nxt in _SENSE_MAP or nxt in ("+", "-") or not re.match(r"[A-Za-z_]", nxt):
                expr.constant += sign * coef
                i += 1
                continue
            expr.add_term(var_of(nxt), sign * coef)
            i += 2
        else:
            expr.add_term(var_of(tok), sign)
            i += 1
    return expr, i


def _apply_bound(toks, var_of) -> None:
    def num(ts):
        sign = 1.0
        while ts and ts[0] in "+-":
            sign *= -1.0 if ts[0] == "-" else 1.0
            ts = ts[1:]
        return sign * _parse_number(ts[0]), ts[1:]

    def is_num(t):
        return t in "+-" or _NUM_RE.match(t) or t.lower() in ("inf", "infinity")

    if len(toks) == 2 and toks[1].lower() == "free":
        v = var_of(toks[0])
        v.lo, v.hi = -math.inf, math.inf
        return
    if is_num(toks[0]):
        lo, rest = num(toks)
        sense = _SENSE_MAP[rest[0]]
        v = var_of(rest[1])
        rest = rest[2:]
        if sense == "=":
            v.lo = v.hi = lo
            return
        if sense == "<=":
            v.lo = lo
        else:
            v.hi = lo
        if rest:
            sense2 = _SENSE_MAP[rest[0]]
            val, _ = num(rest[1:])
            if sense2 == "<=":
                v.hi = val
            else:
                v.lo = val
        return
    v = var_of(toks[0])
    sense = _SENSE_MAP[toks[1]]
    val, _ = num(toks[2:])
    if sense == "=":
        v.lo = v.hi = val
    elif sense == "<=":
        v.hi = val
    else:
        v.lo = val


# -- MPS -----------------------------------------------------------------------


def _mps_fields(*fields: str) -> str:
    """Fixed-MPS column layout (fields start at 2, 5, 15, 25, 40, 50).

    Names longer than eight characters push later fields right; the
    separating blanks keep the line readable as free MPS.
    """
    starts = (1, 4, 14, 24, 39, 49)
    line = ""
    for f, col in zip(fields, starts):
        if not f:
            continue
        if len(line) < col:
            line += " " * (col - len(line))
        elif line:
            line += " "
        line += f
    return line


def mps_text(model: MilpModel) -> str:
    lines = [f"NAME          {model.name}"]
    if model.objective.constant:
        lines.append(f"* {_CONST_TAG} {fmt_num(model.objective.constant)}")
    lines.append("ROWS")
    lines.append(_mps_fields("N", "obj"))
    live = [c for c in model.constraints if not c.vacuous]
    code = {"<=": "L", ">=": "G", "=": "E"}
    for con in live:
        lines.append(_mps_fields(code[con.sense], con.name))
    lines.append("COLUMNS")
    by_var: dict = {v: [] for v in model.variables}
    for v, c in model.objective.terms.items():
        by_var[v].append(("obj", c))
    for con in live:
        for v, c in con.expr.terms.items():
            by_var[v].append((con.name, c))
    in_int = False
    marker = 0
    for v in model.variables:
        want_int = v.kind == BINARY
        if want_int != in_int:
            tag = "'INTORG'" if want_int else "'INTEND'"
            lines.append(_mps_fields("", f"MARKER{marker:04d}", "'MARKER'", "", tag))
            marker += 1
            in_int = want_int
        entries = by_var[v] or [("obj", 0.0)]
        for row, c in entries:
            lines.append(_mps_fields("", v.name, row, fmt_num(c)))
    if in_int:
        lines.append(_mps_fields("", f"MARKER{marker:04d}", "'MARKER'", "", "'INTEND'"))
    lines.append("RHS")
    for con in live:
        if con.rhs != 0.0:
            lines.append(_mps_fields("", "RHS", con.name, fmt_num(con.rhs)))
    lines.append("BOUNDS")
    for v in model.variables:
        lines += _mps_bounds(v)
    lines.append("ENDATA")
    return "\n".join(lines) + "\n"


def _mps_bounds(v) -> list[str]:
    lo, hi, n = v.lo, v.hi, v.name
    if v.kind == BINARY and lo == 0.0 and hi == 1.0:
        return [_mps_fields("BV", "BND", n)]
    if lo == hi:
        return [_mps_fields("FX", "BND", n, fmt_num(lo))]
    if math.isinf(lo) and math.isinf(hi):
        return [_mps_fields("FR", "BND", n)]
    out = []
    if math.isinf(lo):
        out.append(_mps_fields("MI", "BND", n))
    elif lo != 0.0 or v.kind == BINARY:
        out.append(_mps_fields("LO", "BND", n, fmt_num(lo)))
    if not math.isinf(hi):
        out.append(_mps_fields("UP", "BND", n, fmt_num(hi)))
    return out


def write_mps(model: MilpModel, path: str | Path) -> None:
    Path(path).write_text(mps_text(model))


def read_mps(path: str | Path) -> MilpModel:
    return parse_mps(Path(path).read_text())


def parse_mps(text: str) -> MilpModel:
    name = "model"
    constant = 0.0
    section = None
    row_sense: dict[str, str] = {}
    row_order: list[str] = []
    obj_row = None
    cols: dict[str, dict[str, float]] = {}
    col_kind: dict[str, str] = {}
    col_order: list[str] = []
    rhs: dict[str, float] = {}
    bounds: dict[str, list] = {}
    integer = False
    for raw in text.splitlines():
        if raw.startswith("*"):
            body = raw[1:].strip()
            if body.startswith(_CONST_TAG):
                constant = float(body[len(_CONST_TAG):].strip())
            continue
        if not raw.strip():
            continue
        f = raw.split()
        if not raw[0].isspace():
            section = f[0].upper()
            if section == "NAME" and len(f) > 1:
                name = f[1]
            if section == "ENDATA":
                break
            continue
        if section == "ROWS":
            if f[0].upper() == "N":
                if obj_row is None:
                    obj_row = f[1]
                continue
            row_sense[f[1]] = {"L": "<=", "G": ">=", "E": "="}[f[0].upper()]
            row_order.append(f[1])
        elif section == "COLUMNS":
            if len(f) >= 3 and f[1] == "'MARKER'":
                integer = f[2] == "'INTORG'"
                continue
            col = f[0]
            if col not in cols:
                cols[col] = {}
                col_order.append(col)
                col_kind[col] = BINARY if integer else CONTINUOUS
            for r, val in zip(f[1::2], f[2::2]):
                cols[col][r] = cols[col].get(r, 0.0) + float(val)
        elif section == "RHS":
            for r, val in zip(f[1::2], f[2::2]):
                rhs[r] = float(val)
        elif section == "BOUNDS":
            kind, col = f[0].upper(), f[2]
            val = float(f[3]) if len(f) > 3 else None
            bounds.setdefault(col, []).append((kind, val))
        elif section == "RANGES":
            raise LpParseError("MPS RANGES section not supported")
    model = MilpModel(name)
    for col in col_order:
        kind = col_kind[col]
        lo, hi = 0.0, (1.0 if kind == BINARY else math.inf)
        for bkind, val in bounds.get(col, []):
            if bkind == "UP":
                hi = val
            elif bkind == "LO":
                lo = val
            elif bkind == "FX":
                lo = hi = val
            elif bkind == "FR":
                lo, hi = -math.inf, math.inf
            elif bkind == "MI":
                lo = -math.inf
            elif bkind == "PL":
                hi = math.inf
            elif bkind == "BV":
                kind, lo, hi = BINARY, 0.0, 1.0
        model.add_var(col, lo, hi, kind)
    exprs = {r: LinExpr() for r in row_order}
    obj = LinExpr(constant=constant)
    for col in col_order:
        v = model.var(col)
        for r, val in cols[col].items():
            if r == obj_row:
                if val:
                    obj.add_term(v, val)
            else:
                exprs[r].add_term(v, val)
    for r in row_order:
        model.add_constraint(exprs[r], row_sense[r], rhs.get(r, 0.0), name=r)
    model.set_objective(obj)
    return model


def read_model(path: str | Path) -> MilpModel:
    p = Path(path)
    if p.suffix.lower() == ".mps":
        return read_mps(p)
    return read_lp(p)

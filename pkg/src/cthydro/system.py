"""Two-area hydrothermal system: data model, text file format, validation.

System file layout (``#`` starts a comment)::

    version = 1

    [horizon]
    intervals = 24
    delta = 3600              # or: deltas = 3600 3600 1800 ...

    [penalties]
    bypass = 0.001            # mu/m3
    spill = 0.002             # mu/m3

    [areas]
    id       load
    hydro    hydro_load.csv   # 5-minute samples, least-squares fitted (C1)
    thermal  -                # '-' = coefficients listed in [load]

    [load]
    area     interval  c0  c1  c2  c3

    [reservoirs]
    id   V_max  V_init  inflow  spill_to
    R1   5e6    3e6     20      R2        # inflow: number, CSV path or '-'

    [inflow]
    reservoir  interval  value

    [plants]
    id  reservoir  area   Q_d  Q_b  P_min  P_max  discharge_to  bypass_to  creek
    P1  R1         hydro  60   20   10     60     R2            R2         0

    [creek]
    plant  interval  value

    [segments]
    plant  index  Q_s  eta  forbidden

    [thermal]
    id  area  G_min  G_max  C  C_up  C_down  R_u  R_d  R_up_gain  R_down_gain  u_init

    [cables]
    id  from  to  F_max  R_u  R_d

    [cuts]
    id  D  R1  R2            # water value per reservoir column, missing = 0

Units: seconds, m3/s, m3, MW, MW/s; thermal marginal cost ``C`` in mu/MWh,
other costs in mu.  Positive cable flow leaves ``from`` and enters ``to``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .bernstein import (
    PiecewisePoly,
    fit_samples,
    read_samples_csv,
)

SINK = "SINK"
SCHEMA_VERSION = 1
SECONDS_PER_HOUR = 3600.0
_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_]{0,63}$")


class SystemParseError(ValueError):
    """Malformed system file; message carries file, line and field."""


class SystemValidationError(ValueError):
    """Parsed system violates a model invariant."""

    def __init__(self, diagnostics: list[str]):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class DischargeSegment:
    index: int
    Q_s: float
    eta: float
    forbidden: bool = False


@dataclass(frozen=True)
class Reservoir:
    id: str
    V_max: float
    V_init: float
    inflow: tuple[float, ...]  # m3/s, constant within each interval
    spill_to: str = SINK


@dataclass(frozen=True)
class HydroPlant:
    id: str
    reservoir: str
    area: str
    Q_d: float
    Q_b: float
    P_min: float
    P_max: float
    segments: tuple[DischargeSegment, ...]
    discharge_to: str = SINK
    bypass_to: str = SINK
    creek_inflow: tuple[float, ...] = ()


@dataclass(frozen=True)
class ThermalUnit:
    id: str
    area: str
    G_min: float
    G_max: float
    C: float  # mu/MWh
    C_up: float = 0.0
    C_down: float = 0.0
    R_u: float = math.inf
    R_d: float = math.inf
    R_up_gain: float = 0.0
    R_down_gain: float = 0.0
    u_init: int = 0

    @property
    def cost_per_mws(self) -> float:
        return self.C / SECONDS_PER_HOUR


@dataclass(frozen=True)
class Cable:
    id: str
    from_area: str
    to_area: str
    F_max: float
    R_u: float = math.inf
    R_d: float = math.inf

    def incidence(self, area: str) -> int:
        """Direction coefficient G_la: +1 exporting end, -1 importing end, else 0."""
        if area == self.from_area:
            return 1
        if area == self.to_area:
            return -1
        return 0


@dataclass(frozen=True)
class Cut:
    id: str
    D: float
    water_values: tuple[tuple[str, float], ...]

    def coefficient(self, reservoir: str) -> float:
        return dict(self.water_values).get(reservoir, 0.0)


@dataclass(frozen=True)
class Area:
    id: str
    load: PiecewisePoly


@dataclass(frozen=True)
class SystemInstance:
    deltas: tuple[float, ...]
    areas: tuple[Area, ...]
    reservoirs: tuple[Reservoir, ...]
    plants: tuple[HydroPlant, ...] = ()
    thermal: tuple[ThermalUnit, ...] = ()
    cables: tuple[Cable, ...] = ()
    cuts: tuple[Cut, ...] = ()
    bypass_penalty: float = 0.0
    spill_penalty: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "deltas", tuple(float(d) for d in self.deltas))

    @property
    def n_intervals(self) -> int:
        return len(self.deltas)

    @property
    def knots(self) -> tuple[float, ...]:
        return tuple(float(x) for x in np.concatenate([[0.0], np.cumsum(self.deltas)]))

    @property
    def horizon(self) -> float:
        return float(sum(self.deltas))

    def area(self, area_id: str) -> Area:
        return next(a for a in self.areas if a.id == area_id)

    def reservoir(self, rid: str) -> Reservoir:
        return next(r for r in self.reservoirs if r.id == rid)

    def plant_of(self, rid: str) -> HydroPlant | None:
        return next((p for p in self.plants if p.reservoir == rid), None)

    def plants_in(self, area_id: str) -> list[HydroPlant]:
        return [p for p in self.plants if p.area == area_id]

    def thermal_in(self, area_id: str) -> list[ThermalUnit]:
        return [j for j in self.thermal if j.area == area_id]

    def creek(self, plant: HydroPlant) -> tuple[float, ...]:
        return plant.creek_inflow or (0.0,) * self.n_intervals


# -- validation ------------------------------------------------------------------


def find_cycle(edges: dict[str, set[str]]) -> list[str] | None:
    """Return one directed cycle as a node list (first node repeated), or None."""
    WHITE, GREY, BLACK = 0, 1, 2
    color = {n: WHITE for n in edges}
    stack_path: list[str] = []

    def visit(n):
        color[n] = GREY
        stack_path.append(n)
        for m in sorted(edges.get(n, ())):
            if color.get(m, WHITE) == GREY:
                return stack_path[stack_path.index(m):] + [m]
            if color.get(m, WHITE) == WHITE:
                found = visit(m)
                if found:
                    return found
        stack_path.pop()
        color[n] = BLACK
        return None

    for n in sorted(edges):
        if color[n] == WHITE:
            found = visit(n)
            if found:
                return found
    return None


def routing_edges(instance: SystemInstance) -> dict[str, set[str]]:
    edges: dict[str, set[str]] = {r.id: set() for r in instance.reservoirs}
    for r in instance.reservoirs:
        if r.spill_to != SINK:
            edges[r.id].add(r.spill_to)
    for p in instance.plants:
        for target in (p.discharge_to, p.bypass_to):
            if target != SINK:
                edges.setdefault(p.reservoir, set()).add(target)
    return edges


def validate_topology(instance: SystemInstance, tol: float = 1e-9) -> list[str]:
    """Diagnostics for routing, segment consistency and horizon alignment.

    An empty list means the instance is consistent.
    """
    diags: list[str] = []
    n = instance.n_intervals
    res_ids = [r.id for r in instance.reservoirs]
    area_ids = [a.id for a in instance.areas]
    known = set(res_ids)

    for label, ids in (
        ("reservoir", res_ids),
        ("area", area_ids),
        ("plant", [p.id for p in instance.plants]),
        ("thermal unit", [j.id for j in instance.thermal]),
        ("cable", [c.id for c in instance.cables]),
    ):
        dup = sorted({i for i in ids if ids.count(i) > 1})
        if dup:
            diags.append(f"duplicate {label} id: {', '.join(dup)}")

    for r in instance.reservoirs:
        if r.spill_to != SINK and r.spill_to not in known:
            diags.append(f"unknown routing target: reservoir {r.id} spills to {r.spill_to}")
        if len(r.inflow) != n:
            diags.append(f"horizon mismatch: inflow of reservoir {r.id} has {len(r.inflow)} "
                         f"intervals, horizon has {n}")

    seen_res: set[str] = set()
    for p in instance.plants:
        if p.reservoir not in known:
            diags.append(f"plant {p.id} references unknown reservoir {p.reservoir}")
        if p.reservoir in seen_res:
            diags.append(f"reservoir {p.reservoir} has more than one plant")
        seen_res.add(p.reservoir)
        if p.area not in area_ids:
            diags.append(f"plant {p.id} references unknown area {p.area}")
        for what, target in (("discharges", p.discharge_to), ("bypasses", p.bypass_to)):
            if target != SINK and target not in known:
                diags.append(f"unknown routing target: plant {p.id} {what} to {target}")
        if not p.segments:
            diags.append(f"plant {p.id} has no discharge segments")
        else:
            q_sum = sum(s.Q_s for s in p.segments)
            p_sum = sum(s.eta * s.Q_s for s in p.segments)
            if abs(q_sum - p.Q_d) > tol * max(1.0, p.Q_d):
                diags.append(f"segment sum mismatch: plant {p.id} segment widths sum to "
                             f"{q_sum:g}, Q_d is {p.Q_d:g}")
            if abs(p_sum - p.P_max) > tol * max(1.0, p.P_max):
                diags.append(f"segment sum mismatch: plant {p.id} segment capacity "
                             f"{p_sum:g} MW, P_max is {p.P_max:g}")
            if [s.index for s in p.segments] != list(range(len(p.segments))):
                diags.append(f"plant {p.id}: segment indices must be 0..{len(p.segments) - 1}")
        if p.creek_inflow and len(p.creek_inflow) != n:
            diags.append(f"horizon mismatch: creek inflow of plant {p.id} has "
                         f"{len(p.creek_inflow)} intervals, horizon has {n}")

    for j in instance.thermal:
        if j.area not in area_ids:
            diags.append(f"thermal unit {j.id} references unknown area {j.area}")
    for c in instance.cables:
        for end in (c.from_area, c.to_area):
            if end not in area_ids:
                diags.append(f"cable {c.id} references unknown area {end}")
        if c.from_area == c.to_area:
            diags.append(f"cable {c.id} connects area {c.from_area} to itself")
    for cut in instance.cuts:
        for rid, _ in cut.water_values:
            if rid not in known:
                diags.append(f"cut {cut.id} references unknown reservoir {rid}")

    knots = np.array(instance.knots)
    for a in instance.areas:
        if a.load.n_intervals != n:
            diags.append(f"horizon mismatch: load of area {a.id} has {a.load.n_intervals} "
                         f"intervals, horizon has {n}")
        elif not np.allclose(a.load.knots, knots, rtol=0, atol=1e-6):
            diags.append(f"horizon mismatch: load knots of area {a.id} differ from the horizon")

    cycle = find_cycle(routing_edges(instance))
    if cycle:
        diags.append("topology cycle: " + " -> ".join(cycle))
    return diags


def check_invariants(instance: SystemInstance) -> list[str]:
    """Value-level invariants of individual records."""
    diags = []
    for label, ids in (
        ("area", [a.id for a in instance.areas]),
        ("reservoir", [r.id for r in instance.reservoirs]),
        ("plant", [p.id for p in instance.plants]),
        ("thermal unit", [j.id for j in instance.thermal]),
        ("cable", [c.id for c in instance.cables]),
    ):
        for i in ids:
            if not _ID_RE.match(i) or i == SINK:
                diags.append(f"{label} id {i!r}: use letters, digits and underscore "
                             f"(max 64 chars, not {SINK})")
    if any(d <= 0 for d in instance.deltas):
        diags.append("horizon: interval lengths must be positive")
    for r in instance.reservoirs:
        if not 0 <= r.V_init <= r.V_max:
            diags.append(f"reservoir {r.id}: V_init={r.V_init:g} outside [0, V_max={r.V_max:g}]")
        if any(x < 0 for x in r.inflow):
            diags.append(f"reservoir {r.id}: negative inflow")
    for p in instance.plants:
        if not 0 <= p.P_min <= p.P_max:
            diags.append(f"plant {p.id}: need 0 <= P_min <= P_max")
        if p.Q_d < 0 or p.Q_b < 0:
            diags.append(f"plant {p.id}: negative flow capacity")
        for s in p.segments:
            if s.Q_s <= 0:
                diags.append(f"plant {p.id} segment {s.index}: width must be positive")
            if s.eta < 0:
                diags.append(f"plant {p.id} segment {s.index}: negative conversion factor")
    for j in instance.thermal:
        if not 0 <= j.G_min <= j.G_max:
            diags.append(f"thermal unit {j.id}: need 0 <= G_min <= G_max")
        if min(j.C, j.C_up, j.C_down) < 0:
            diags.append(f"thermal unit {j.id}: negative cost")
        if min(j.R_u, j.R_d, j.R_up_gain, j.R_down_gain) < 0:
            diags.append(f"thermal unit {j.id}: negative ramp rate")
        if j.u_init not in (0, 1):
            diags.append(f"thermal unit {j.id}: u_init must be 0 or 1")
    for c in instance.cables:
        if c.F_max < 0 or c.R_u < 0 or c.R_d < 0:
            diags.append(f"cable {c.id}: negative limit")
    if instance.bypass_penalty < 0 or instance.spill_penalty < 0:
        diags.append("penalties must be non-negative")
    return diags


def validate(instance: SystemInstance) -> None:
    diags = check_invariants(instance) + validate_topology(instance)
    if diags:
        raise SystemValidationError(diags)


# -- reading -------------------------------------------------------------------------


@dataclass
class _Section:
    name: str
    start: int
    lines: list[tuple[int, str]] = field(default_factory=list)


class _Reader:
    def __init__(self, path: Path, text: str):
        self.path = path
        self.text = text

    def error(self, lineno: int, msg: str) -> SystemParseError:
        return SystemParseError(f"{self.path}:{lineno}: {msg}")

    def sections(self) -> tuple[dict[str, str], dict[str, _Section]]:
        top: dict[str, str] = {}
        secs: dict[str, _Section] = {}
        cur = None
        for lineno, raw in enumerate(self.text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("["):
                if not line.endswith("]"):
                    raise self.error(lineno, f"malformed section header {line!r}")
                name = line[1:-1].strip().lower()
                if name in secs:
                    raise self.error(lineno, f"duplicate section [{name}]")
                cur = secs[name] = _Section(name, lineno)
                continue
            if cur is None:
                key, eq, val = line.partition("=")
                if not eq:
                    raise self.error(lineno, f"expected 'key = value', got {line!r}")
                top[key.strip()] = val.strip()
            else:
                cur.lines.append((lineno, line))
        return top, secs

    def keyvals(self, sec: _Section) -> dict[str, tuple[int, str]]:
        out = {}
        for lineno, line in sec.lines:
            key, eq, val = line.partition("=")
            if not eq:
                raise self.error(lineno, f"[{sec.name}]: expected 'key = value'")
            out[key.strip()] = (lineno, val.strip())
        return out

    def table(self, sec: _Section | None, required: Iterable[str]) -> list[tuple[int, dict[str, str]]]:
        if sec is None or not sec.lines:
            return []
        head_line, head = sec.lines[0]
        cols = head.split()
        missing = [c for c in required if c not in cols]
        if missing:
            raise self.error(head_line, f"[{sec.name}]: missing column(s) {', '.join(missing)}")
        rows = []
        for lineno, line in sec.lines[1:]:
            cells = line.split()
            if len(cells) != len(cols):
                raise self.error(lineno, f"[{sec.name}]: expected {len(cols)} fields, got {len(cells)}")
            rows.append((lineno, dict(zip(cols, cells))))
        return rows

    def num(self, lineno: int, row: dict, key: str, default=None) -> float:
        if key not in row:
            if default is None:
                raise self.error(lineno, f"field '{key}': missing")
            return default
        try:
            return float(row[key])
        except ValueError:
            raise self.error(lineno, f"field '{key}': expected a number, got {row[key]!r}") from None


def _is_csv_ref(cell: str) -> bool:
    return cell.lower().endswith(".csv")


def _interval_means(samples: np.ndarray, knots: np.ndarray) -> tuple[float, ...]:
    idx = np.clip(np.searchsorted(knots, samples[:, 0], side="right") - 1, 0, len(knots) - 2)
    out = []
    for h in range(len(knots) - 1):
        vals = samples[idx == h, 1]
        if not len(vals):
            raise ValueError(f"no samples in interval {h}")
        out.append(float(np.mean(vals)))
    return tuple(out)


def _series_table(reader: _Reader, sec, key_col: str, n: int) -> dict[str, dict[int, tuple[int, list]]]:
    out: dict[str, dict[int, tuple[int, list]]] = {}
    if sec is None:
        return out
    value_cols = None
    for lineno, row in reader.table(sec, [key_col, "interval"]):
        if value_cols is None:
            value_cols = [c for c in row if c not in (key_col, "interval")]
        h = int(reader.num(lineno, row, "interval"))
        if not 0 <= h:
            raise reader.error(lineno, "field 'interval': must be non-negative")
        vals = [reader.num(lineno, row, c) for c in value_cols]
        out.setdefault(row[key_col], {})[h] = (lineno, vals)
    return out


def load_system(path: str | Path, enforce_c1: bool = True) -> SystemInstance:
    """Parse and validate a system file.

    CSV references are resolved relative to the system file.  Load CSVs are
    fitted with :func:`fit_samples` on the horizon knots; inflow CSVs are
    averaged per interval.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SystemParseError(f"{path}: cannot read: {exc}") from None
    instance = parse_system(text, path, enforce_c1=enforce_c1)
    validate(instance)
    return instance


def parse_system(text: str, path: Path | str = "<string>", enforce_c1: bool = True) -> SystemInstance:
    path = Path(path)
    base = path.parent
    rd = _Reader(path, text)
    top, secs = rd.sections()

    version = top.get("version", str(SCHEMA_VERSION))
    if version != str(SCHEMA_VERSION):
        raise SystemParseError(f"{path}: unsupported schema version {version}")

    if "horizon" not in secs:
        raise SystemParseError(f"{path}: missing [horizon] section")
    hz = rd.keyvals(secs["horizon"])
    if "deltas" in hz:
        ln, val = hz["deltas"]
        try:
            deltas = tuple(float(x) for x in val.replace(",", " ").split())
        except ValueError:
            raise rd.error(ln, "field 'deltas': expected numbers") from None
    else:
        if "intervals" not in hz or "delta" not in hz:
            raise rd.error(secs["horizon"].start, "[horizon] needs 'deltas' or 'intervals' and 'delta'")
        ln, val = hz["intervals"]
        try:
            n_int = int(val)
        except ValueError:
            raise rd.error(ln, "field 'intervals': expected an integer") from None
        ln, val = hz["delta"]
        try:
            deltas = (float(val),) * n_int
        except ValueError:
            raise rd.error(ln, "field 'delta': expected a number") from None
    n = len(deltas)
    knots = np.concatenate([[0.0], np.cumsum(deltas)])

    pen = rd.keyvals(secs["penalties"]) if "penalties" in secs else {}

    def pen_val(key):
        if key not in pen:
            return 0.0
        ln, val = pen[key]
        try:
            return float(val)
        except ValueError:
            raise rd.error(ln, f"field '{key}': expected a number") from None

    load_rows = _series_table(rd, secs.get("load"), "area", n)
    areas = []
    for lineno, row in rd.table(secs.get("areas"), ["id"]):
        cell = row.get("load", "-")
        if _is_csv_ref(cell):
            try:
                samples = read_samples_csv(base / cell)
                poly = fit_samples(samples, knots, enforce_c1=enforce_c1)
            except (OSError, ValueError) as exc:
                raise rd.error(lineno, f"field 'load': {exc}") from None
        elif cell == "-":
            rows = load_rows.get(row["id"], {})
            coeffs = []
            for h in range(len(rows)):
                if h not in rows:
                    raise rd.error(lineno, f"[load] for area {row['id']}: interval {h} missing")
                coeffs.append(rows[h][1])
            if not coeffs:
                raise rd.error(lineno, f"area {row['id']}: no load given")
            lengths = {len(c) for c in coeffs}
            if len(lengths) != 1 or lengths.pop() not in (3, 4, 5):
                raise rd.error(lineno, f"[load] for area {row['id']}: inconsistent coefficient count")
            # knots follow the horizon when the row count matches, else a mismatch is diagnosed
            k = knots if len(coeffs) == n else np.concatenate(
                [[0.0], np.cumsum([deltas[0]] * len(coeffs))])
            poly = PiecewisePoly.from_coeffs(k, coeffs)
        else:
            try:
                poly = PiecewisePoly.constant(knots, float(cell))
            except ValueError:
                raise rd.error(lineno, "field 'load': expected number, CSV path or '-'") from None
        areas.append(Area(row["id"], poly))

    inflow_rows = _series_table(rd, secs.get("inflow"), "reservoir", n)

    def series(lineno, cell, rows, owner, what):
        if _is_csv_ref(cell):
            try:
                return _interval_means(read_samples_csv(base / cell), knots)
            except (OSError, ValueError) as exc:
                raise rd.error(lineno, f"field '{what}': {exc}") from None
        if cell == "-":
            got = rows.get(owner, {})
            return tuple(got[h][1][0] for h in sorted(got))
        try:
            return (float(cell),) * n
        except ValueError:
            raise rd.error(lineno, f"field '{what}': expected number, CSV path or '-'") from None

    reservoirs = []
    for lineno, row in rd.table(secs.get("reservoirs"), ["id", "V_max", "V_init"]):
        reservoirs.append(Reservoir(
            id=row["id"],
            V_max=rd.num(lineno, row, "V_max"),
            V_init=rd.num(lineno, row, "V_init"),
            inflow=series(lineno, row.get("inflow", "0"), inflow_rows, row["id"], "inflow"),
            spill_to=row.get("spill_to", SINK),
        ))

    seg_rows: dict[str, list[DischargeSegment]] = {}
    for lineno, row in rd.table(secs.get("segments"), ["plant", "index", "Q_s", "eta"]):
        forb = row.get("forbidden", "0")
        if forb not in ("0", "1"):
            raise rd.error(lineno, "field 'forbidden': expected 0 or 1")
        seg_rows.setdefault(row["plant"], []).append(DischargeSegment(
            index=int(rd.num(lineno, row, "index")),
            Q_s=rd.num(lineno, row, "Q_s"),
            eta=rd.num(lineno, row, "eta"),
            forbidden=forb == "1",
        ))

    creek_rows = _series_table(rd, secs.get("creek"), "plant", n)
    plants = []
    for lineno, row in rd.table(secs.get("plants"),
                                ["id", "reservoir", "area", "Q_d", "Q_b", "P_min", "P_max"]):
        segs = tuple(sorted(seg_rows.pop(row["id"], []), key=lambda s: s.index))
        creek = series(lineno, row.get("creek", "0"), creek_rows, row["id"], "creek")
        plants.append(HydroPlant(
            id=row["id"],
            reservoir=row["reservoir"],
            area=row["area"],
            Q_d=rd.num(lineno, row, "Q_d"),
            Q_b=rd.num(lineno, row, "Q_b"),
            P_min=rd.num(lineno, row, "P_min"),
            P_max=rd.num(lineno, row, "P_max"),
            segments=segs,
            discharge_to=row.get("discharge_to", SINK),
            bypass_to=row.get("bypass_to", SINK),
            creek_inflow=creek,
        ))
    if seg_rows:
        raise SystemParseError(f"{path}: segments for unknown plant(s) {', '.join(sorted(seg_rows))}")

    thermal = []
    for lineno, row in rd.table(secs.get("thermal"), ["id", "area", "G_min", "G_max", "C"]):
        u0 = rd.num(lineno, row, "u_init", 0.0)
        thermal.append(ThermalUnit(
            id=row["id"],
            area=row["area"],
            G_min=rd.num(lineno, row, "G_min"),
            G_max=rd.num(lineno, row, "G_max"),
            C=rd.num(lineno, row, "C"),
            C_up=rd.num(lineno, row, "C_up", 0.0),
            C_down=rd.num(lineno, row, "C_down", 0.0),
            R_u=rd.num(lineno, row, "R_u", math.inf),
            R_d=rd.num(lineno, row, "R_d", math.inf),
            R_up_gain=rd.num(lineno, row, "R_up_gain", 0.0),
            R_down_gain=rd.num(lineno, row, "R_down_gain", 0.0),
            u_init=int(u0) if u0 in (0.0, 1.0) else -1,
        ))

    cables = []
    for lineno, row in rd.table(secs.get("cables"), ["id", "from", "to", "F_max"]):
        cables.append(Cable(
            id=row["id"],
            from_area=row["from"],
            to_area=row["to"],
            F_max=rd.num(lineno, row, "F_max"),
            R_u=rd.num(lineno, row, "R_u", math.inf),
            R_d=rd.num(lineno, row, "R_d", math.inf),
        ))

    cuts = []
    for lineno, row in rd.table(secs.get("cuts"), ["id", "D"]):
        wv = tuple((k, rd.num(lineno, row, k)) for k in row if k not in ("id", "D"))
        cuts.append(Cut(row["id"], rd.num(lineno, row, "D"), wv))

    return SystemInstance(
        deltas=tuple(deltas),
        areas=tuple(areas),
        reservoirs=tuple(reservoirs),
        plants=tuple(plants),
        thermal=tuple(thermal),
        cables=tuple(cables),
        cuts=tuple(cuts),
        bypass_penalty=pen_val("bypass"),
        spill_penalty=pen_val("spill"),
    )


# -- writing -------------------------------------------------------------------------


def _f(x: float) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _table(header: list[str], rows: list[list[str]]) -> list[str]:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(header)]
    fmt = lambda cells: "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    return [fmt(header)] + [fmt(r) for r in rows]


def system_text(instance: SystemInstance, load_refs: dict[str, str] | None = None) -> str:
    """Serialize an instance.

    Every series is written inline so the text is self-contained, except
    loads of areas listed in ``load_refs``, which point at sample CSVs.
    """
    load_refs = load_refs or {}
    out = [f"version = {SCHEMA_VERSION}", "", "[horizon]"]
    out.append("deltas = " + " ".join(_f(d) for d in instance.deltas))
    out += ["", "[penalties]", f"bypass = {_f(instance.bypass_penalty)}",
            f"spill = {_f(instance.spill_penalty)}"]
    out += ["", "[areas]"] + _table(["id", "load"],
                                    [[a.id, load_refs.get(a.id, "-")] for a in instance.areas])
    load_rows = []
    for a in instance.areas:
        if a.id in load_refs:
            continue
        for h, iv in enumerate(a.load.intervals):
            load_rows.append([a.id, str(h)] + [_f(c) for c in iv.coeffs])
    deg = max((a.load.max_degree for a in instance.areas if a.id not in load_refs), default=3)
    if load_rows:
        out += ["", "[load]"] + _table(["area", "interval"] + [f"c{i}" for i in range(deg + 1)],
                                       load_rows)
    out += ["", "[reservoirs]"] + _table(
        ["id", "V_max", "V_init", "inflow", "spill_to"],
        [[r.id, _f(r.V_max), _f(r.V_init), "-", r.spill_to] for r in instance.reservoirs])
    out += ["", "[inflow]"] + _table(
        ["reservoir", "interval", "value"],
        [[r.id, str(h), _f(v)] for r in instance.reservoirs for h, v in enumerate(r.inflow)])
    if instance.plants:
        out += ["", "[plants]"] + _table(
            ["id", "reservoir", "area", "Q_d", "Q_b", "P_min", "P_max",
             "discharge_to", "bypass_to", "creek"],
            [[p.id, p.reservoir, p.area, _f(p.Q_d), _f(p.Q_b), _f(p.P_min), _f(p.P_max),
              p.discharge_to, p.bypass_to, "-"] for p in instance.plants])
        creek_rows = [[p.id, str(h), _f(v)] for p in instance.plants
                      for h, v in enumerate(p.creek_inflow)]
        if creek_rows:
            out += ["", "[creek]"] + _table(["plant", "interval", "value"], creek_rows)
        out += ["", "[segments]"] + _table(
            ["plant", "index", "Q_s", "eta", "forbidden"],
            [[p.id, str(s.index), _f(s.Q_s), _f(s.eta), "1" if s.forbidden else "0"]
             for p in instance.plants for s in p.segments])
    if instance.thermal:
        out += ["", "[thermal]"] + _table(
            ["id", "area", "G_min", "G_max", "C", "C_up", "C_down", "R_u", "R_d",
             "R_up_gain", "R_down_gain", "u_init"],
            [[j.id, j.area, _f(j.G_min), _f(j.G_max), _f(j.C), _f(j.C_up), _f(j.C_down),
              _f(j.R_u), _f(j.R_d), _f(j.R_up_gain), _f(j.R_down_gain), str(j.u_init)]
             for j in instance.thermal])
    if instance.cables:
        out += ["", "[cables]"] + _table(
            ["id", "from", "to", "F_max", "R_u", "R_d"],
            [[c.id, c.from_area, c.to_area, _f(c.F_max), _f(c.R_u), _f(c.R_d)]
             for c in instance.cables])
    if instance.cuts:
        res_cols: list[str] = []
        for cut in instance.cuts:
            for rid, _ in cut.water_values:
                if rid not in res_cols:
                    res_cols.append(rid)
        out += ["", "[cuts]"] + _table(
            ["id", "D"] + res_cols,
            [[cut.id, _f(cut.D)] + [_f(cut.coefficient(r)) for r in res_cols]
             for cut in instance.cuts])
    return "\n".join(out) + "\n"


def write_system(instance: SystemInstance, path: str | Path) -> None:
    Path(path).write_text(system_text(instance))

"""Network topology, measurement configuration and the DC measurement matrix.

Buses are numbered 1..n externally. Lines are referenced by their 0-based
position in ``GridTopology.lines``. A flow measurement on line (i, j) gives
the row ``+B`` at ``min(i, j)`` and ``-B`` at ``max(i, j)``; an angle
measurement at bus i gives a unit row.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ParseError, ValidationError

FLOW = "flow"
ANGLE = "angle"

BUNDLED_CASES = ("case14", "case30", "case57", "case118")


@dataclass(frozen=True)
class Line:
    from_bus: int
    to_bus: int
    susceptance: float

    @property
    def endpoints(self) -> tuple[int, int]:
        return (min(self.from_bus, self.to_bus), max(self.from_bus, self.to_bus))


@dataclass(frozen=True)
class GridTopology:
    """Buses ``1..n_buses`` joined by susceptance-weighted lines.

    ``source_ids[k]`` is the bus id the input file used for internal bus
    ``k + 1``; it is only populated when an import renumbered the buses.
    """

    n_buses: int
    lines: tuple[Line, ...]
    source_ids: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.n_buses < 1:
            raise ValidationError("a grid needs at least one bus")
        object.__setattr__(self, "lines", tuple(self.lines))
        for k, ln in enumerate(self.lines):
            for b in (ln.from_bus, ln.to_bus):
                if not 1 <= b <= self.n_buses:
                    raise ValidationError(
                        f"line {k} ({ln.from_bus}, {ln.to_bus}) references missing bus {b}"
                    )
            if ln.from_bus == ln.to_bus:
                raise ValidationError(f"line {k} is a self-loop at bus {ln.from_bus}")
            if not (ln.susceptance > 0 and np.isfinite(ln.susceptance)):
                raise ValidationError(
                    f"line {k} ({ln.from_bus}, {ln.to_bus}) has non-positive susceptance {ln.susceptance}"
                )
        if self.source_ids is not None and len(self.source_ids) != self.n_buses:
            raise ValidationError("source_ids must have one entry per bus")

    @property
    def buses(self) -> range:
        return range(1, self.n_buses + 1)

    def incident_lines(self, bus: int) -> list[int]:
        return [k for k, ln in enumerate(self.lines) if bus in (ln.from_bus, ln.to_bus)]

    def degree(self, bus: int) -> int:
        return len(self.incident_lines(bus))

    def find_line(self, a: int, b: int) -> int:
        """Index of the first line joining buses ``a`` and ``b``."""
        key = (min(a, b), max(a, b))
        for k, ln in enumerate(self.lines):
            if ln.endpoints == key:
                return k
        raise ValidationError(f"no line between buses {a} and {b}")

    def with_susceptances(self, values: Sequence[float]) -> GridTopology:
        if len(values) != len(self.lines):
            raise ValidationError("need one susceptance per line")
        lines = tuple(replace(ln, susceptance=float(v)) for ln, v in zip(self.lines, values))
        return replace(self, lines=lines)


@dataclass(frozen=True)
class Source:
    type: str = "scada"
    bus: int | None = None
    secure: bool = False

    def __post_init__(self):
        if self.type not in ("scada", "pmu"):
            raise ValidationError(f"unknown measurement source {self.type!r}")
        if self.type == "pmu" and self.bus is None:
            raise ValidationError("a PMU source needs its bus")


SCADA = Source()


@dataclass(frozen=True)
class Measurement:
    """One meter reading, i.e. one row of H.

    ``target`` is a line index for flow measurements and a bus id for angle
    measurements.
    """

    id: int
    kind: str
    target: int
    protected: bool = False
    source: Source = SCADA

    def __post_init__(self):
        if self.kind not in (FLOW, ANGLE):
            raise ValidationError(f"unknown measurement kind {self.kind!r}")
        if self.source.type == "pmu" and self.source.secure and not self.protected:
            raise ValidationError(f"measurement {self.id} comes from a secure PMU but is unprotected")


@dataclass(frozen=True)
class MeasurementSet:
    measurements: tuple[Measurement, ...] = ()
    protected_states: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "measurements", tuple(self.measurements))
        object.__setattr__(self, "protected_states", frozenset(self.protected_states))
        for k, meas in enumerate(self.measurements):
            if meas.id != k:
                raise ValidationError(f"measurement ids must be 0..m-1 in order; position {k} has id {meas.id}")

    def __len__(self) -> int:
        return len(self.measurements)

    def __iter__(self):
        return iter(self.measurements)

    def __getitem__(self, k: int) -> Measurement:
        return self.measurements[k]

    @property
    def protected_ids(self) -> list[int]:
        return [meas.id for meas in self.measurements if meas.protected]

    @property
    def unprotected_ids(self) -> list[int]:
        return [meas.id for meas in self.measurements if not meas.protected]

    def validate(self, topo: GridTopology) -> None:
        for meas in self.measurements:
            if meas.kind == FLOW and not 0 <= meas.target < len(topo.lines):
                raise ValidationError(f"measurement {meas.id} references missing line {meas.target}")
            if meas.kind == ANGLE and not 1 <= meas.target <= topo.n_buses:
                raise ValidationError(f"measurement {meas.id} references missing bus {meas.target}")
            if meas.source.type == "pmu" and not 1 <= meas.source.bus <= topo.n_buses:
                raise ValidationError(f"measurement {meas.id} has a PMU at missing bus {meas.source.bus}")
        bad = [b for b in self.protected_states if not 1 <= b <= topo.n_buses]
        if bad:
            raise ValidationError(f"protected states reference missing buses {sorted(bad)}")

    def protect(self, ids: Iterable[int]) -> MeasurementSet:
        """Copy with the given measurement ids flagged as protected."""
        ids = set(ids)
        meas = tuple(replace(m, protected=True) if m.id in ids else m for m in self.measurements)
        return MeasurementSet(meas, self.protected_states)

    def append(self, kind: str, target: int, protected: bool = False, source: Source = SCADA) -> MeasurementSet:
        new = Measurement(len(self.measurements), kind, target, protected, source)
        return MeasurementSet(self.measurements + (new,), self.protected_states)


@dataclass(frozen=True)
class MeasurementMatrix:
    H: np.ndarray
    row_map: dict[int, int]

    @property
    def shape(self) -> tuple[int, int]:
        return self.H.shape


def build_measurement_matrix(topo: GridTopology, ms: MeasurementSet) -> MeasurementMatrix:
    ms.validate(topo)
    H = np.zeros((len(ms), topo.n_buses))
    for meas in ms:
        if meas.kind == FLOW:
            ln = topo.lines[meas.target]
            lo, hi = ln.endpoints
            H[meas.id, lo - 1] = ln.susceptance
            H[meas.id, hi - 1] = -ln.susceptance
        else:
            H[meas.id, meas.target - 1] = 1.0
    H.setflags(write=False)
    return MeasurementMatrix(H, {meas.id: meas.id for meas in ms})


def expand_pmu(ms: MeasurementSet, bus: int, secure: bool, topo: GridTopology) -> MeasurementSet:
    """Append the readings of a PMU at ``bus``: its angle and every incident flow.

    A secure PMU protects everything it reports and pins the bus angle;
    an insecure one adds ordinary, attackable measurements.
    """
    if not 1 <= bus <= topo.n_buses:
        raise ValidationError(f"cannot place a PMU at missing bus {bus}")
    src = Source("pmu", bus, bool(secure))
    out = ms.append(ANGLE, bus, protected=secure, source=src)
    for k in topo.incident_lines(bus):
        out = out.append(FLOW, k, protected=secure, source=src)
    if secure:
        out = MeasurementSet(out.measurements, ms.protected_states | {bus})
    return out


def full_flow_measurements(topo: GridTopology, angle_buses: Iterable[int] = ()) -> MeasurementSet:
    """Flow meters on every line (in line order) followed by the given angle meters."""
    ms = MeasurementSet()
    for k in range(len(topo.lines)):
        ms = ms.append(FLOW, k)
    for b in sorted(angle_buses):
        ms = ms.append(ANGLE, b)
    return ms


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------

_MATRIX_START = re.compile(r"^\s*mpc\.(\w+)\s*=\s*\[(.*)$")


def _parse_matpower_matrices(text: str, path) -> dict[str, list[tuple[int, list[float]]]]:
    """Extract every ``mpc.<name> = [ ... ];`` block as rows tagged by line number."""
    blocks: dict[str, list[tuple[int, list[float]]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("%", 1)[0]
        if current is None:
            m = _MATRIX_START.match(line)
            if not m:
                continue
            current = m.group(1)
            blocks[current] = []
            line = m.group(2)
        closed = "]" in line
        if closed:
            line = line.split("]", 1)[0]
        for chunk in line.split(";"):
            chunk = chunk.replace(",", " ").strip()
            if not chunk:
                continue
            try:
                row = [float(tok) for tok in chunk.split()]
            except ValueError:
                raise ParseError(f"non-numeric entry in mpc.{current}: {chunk!r}", lineno, path) from None
            blocks[current].append((lineno, row))
        if closed:
            current = None
    if current is not None:
        raise ParseError(f"unterminated matrix mpc.{current}", None, path)
    return blocks


def parse_matpower(text: str, path=None) -> GridTopology:
    blocks = _parse_matpower_matrices(text, path)
    for name in ("bus", "branch"):
        if name not in blocks:
            raise ParseError(f"missing mpc.{name}", None, path)
    raw_ids = []
    for lineno, row in blocks["bus"]:
        if not row or not float(row[0]).is_integer():
            raise ParseError("bus id must be an integer", lineno, path)
        raw_ids.append(int(row[0]))
    if len(set(raw_ids)) != len(raw_ids):
        raise ValidationError("duplicate bus ids in mpc.bus")
    ordered = sorted(raw_ids)
    dense = {old: k + 1 for k, old in enumerate(ordered)}
    renumbered = ordered != list(range(1, len(ordered) + 1))
    lines = []
    for lineno, row in blocks["branch"]:
        if len(row) < 4:
            raise ParseError(f"branch row needs at least 4 columns, got {len(row)}", lineno, path)
        f, t, x = row[0], row[1], row[3]
        for b in (f, t):
            if not float(b).is_integer() or int(b) not in dense:
                raise ValidationError(f"branch at line {lineno} references unknown bus {b:g}")
        if x == 0:
            raise ValidationError(f"branch at line {lineno} has zero reactance")
        lines.append(Line(dense[int(f)], dense[int(t)], abs(1.0 / x)))
    return GridTopology(len(ordered), tuple(lines), tuple(ordered) if renumbered else None)


def bundled_case_path(name: str) -> Path:
    if name not in BUNDLED_CASES:
        raise ValueError(f"unknown bundled case {name!r}; choose from {', '.join(BUNDLED_CASES)}")
    return Path(str(resources.files("gridcut") / "cases" / f"{name}.m"))


def resolve_case(case: str | Path) -> Path:
    """Accept either a path or the name of a bundled case (``case14``...)."""
    if isinstance(case, str) and case in BUNDLED_CASES:
        return bundled_case_path(case)
    return Path(case)


def load_case(path: str | Path, format: str | None = None) -> GridTopology:
    """Read a topology from a MATPOWER ``.m`` case or a native scenario JSON.

    ``format`` is ``"matpower"`` or ``"json"``; by default it is inferred from
    the file suffix.
    """
    path = resolve_case(path)
    if format is None:
        format = "json" if path.suffix.lower() == ".json" else "matpower"
    text = path.read_text()
    if format == "matpower":
        return parse_matpower(text, path)
    if format == "json":
        return scenario_from_dict(_load_json(text, path)).topology
    raise ValueError(f"unknown case format {format!r}")


@dataclass(frozen=True)
class Scenario:
    topology: GridTopology
    measurements: MeasurementSet
    seed: int | None = None


def _load_json(text: str, path=None):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, path) from None


def _topology_from_dict(doc: dict) -> GridTopology:
    try:
        n = int(doc["buses"])
        lines = tuple(Line(int(f), int(t), float(b)) for f, t, b in doc.get("lines", []))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad topology record: {exc}") from None
    return GridTopology(n, lines)


def scenario_from_dict(doc: dict) -> Scenario:
    topo = _topology_from_dict(doc)
    ms = MeasurementSet()
    for k, rec in enumerate(doc.get("measurements", [])):
        try:
            kind = rec["kind"]
            target = rec["target"]
            src = rec.get("source", {"type": "scada"})
            source = Source(src["type"], src.get("bus"), bool(src.get("secure", False)))
            if kind == FLOW:
                target = topo.find_line(*target) if isinstance(target, list) else int(target)
            elif kind == ANGLE:
                target = int(target)
            ms = ms.append(kind, target, bool(rec.get("protected", False)), source)
        except (KeyError, TypeError) as exc:
            raise ParseError(f"bad measurement record #{k}: {exc}") from None
    ms = MeasurementSet(ms.measurements, frozenset(int(b) for b in doc.get("protected_states", [])))
    ms.validate(topo)
    seed = doc.get("seed")
    return Scenario(topo, ms, None if seed is None else int(seed))


def scenario_to_dict(scenario: Scenario) -> dict:
    topo = scenario.topology
    pairs = [ln.endpoints for ln in topo.lines]
    records = []
    for meas in scenario.measurements:
        if meas.kind == FLOW:
            ln = topo.lines[meas.target]
            # the [from, to] form resolves to the first matching line, so
            # later parallel lines keep their explicit index
            unique = pairs.index(ln.endpoints) == meas.target
            target = [ln.from_bus, ln.to_bus] if unique else meas.target
        else:
            target = meas.target
        if meas.source.type == "pmu":
            source = {"type": "pmu", "bus": meas.source.bus, "secure": meas.source.secure}
        else:
            source = {"type": "scada"}
        records.append({"kind": meas.kind, "target": target, "protected": meas.protected, "source": source})
    doc = {
        "buses": topo.n_buses,
        "lines": [[ln.from_bus, ln.to_bus, ln.susceptance] for ln in topo.lines],
        "measurements": records,
        "protected_states": sorted(scenario.measurements.protected_states),
    }
    if scenario.seed is not None:
        doc["seed"] = scenario.seed
    return doc


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    return scenario_from_dict(_load_json(path.read_text(), path))


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=2) + "\n")

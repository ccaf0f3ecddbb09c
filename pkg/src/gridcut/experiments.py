"""Randomised scenarios, parameter sweeps and their CSV form.

Randomness comes from numpy's Philox4x64-10 counter-based generator. The
64-bit experiment seed is the Philox key, and every draw uses its own
sub-stream selected by the 256-bit counter's upper words
``(0, point, purpose, trial)``, where ``purpose`` is 0 for meter placement,
1 for protections and 2 for PMU sites, and ``point`` is the sweep point
(always 0 unless ``independent_draws`` is set). A trial's scenario is a
pure function of ``(seed, trial)`` and does not depend on execution order.

Within a trial the protected set and the random PMU sites are prefixes of a
single shuffled order, so larger fractions nest the smaller ones.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path

import numpy as np

from .attack import INFEASIBLE, OPTIMAL, UNOBSERVABLE, optimal_attack
from .grid import GridTopology, MeasurementSet, expand_pmu, full_flow_measurements, load_case
from .oracle import brute_force_attack, l1_attack
from .planner import greedy_pmu, greedy_protect

SWEEP_PARAMS = ("protect_fraction", "pmu_count", "greedy_k")
ENGINES = ("mincut", "bruteforce", "l1")

_METERS, _PROTECT, _PMU = 0, 1, 2


@dataclass(frozen=True)
class ScenarioConfig:
    case: str
    flow_coverage: float = 1.0
    angle_coverage: float = 0.6
    protect_fraction: float = 0.0
    pmu_count: int = 0
    pmu_buses: tuple[tuple[int, bool], ...] = ()
    pmu_secure: bool = True
    seed: int = 0
    trials: int = 1
    fixed_meters: bool = False
    independent_draws: bool = False
    greedy_mode: str = "protect"

    def __post_init__(self):
        for name in ("flow_coverage", "angle_coverage", "protect_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} must lie in [0, 1]")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.pmu_count < 0:
            raise ValueError("pmu_count must be >= 0")
        if self.greedy_mode not in ("protect", "pmu"):
            raise ValueError(f"unknown greedy mode {self.greedy_mode!r}")


def _count(fraction: float, total: int) -> int:
    return min(total, math.floor(fraction * total + 0.5))


def substream(seed: int, purpose: int, trial: int, point: int = 0) -> np.random.Generator:
    bitgen = np.random.Philox(key=seed & (2**64 - 1), counter=[0, point, purpose, trial])
    return np.random.Generator(bitgen)


@lru_cache(maxsize=16)
def _cached_case(case: str) -> GridTopology:
    return load_case(case)


def randomize_scenario(config: ScenarioConfig, trial: int, topo: GridTopology | None = None, point: int = 0) -> MeasurementSet:
    """Meters, protections and PMUs for one trial.

    Flow meters go on a ``flow_coverage`` share of lines and angle meters on
    an ``angle_coverage`` share of buses. Then a ``protect_fraction`` share of
    those meters is protected. Finally the explicit PMUs and ``pmu_count``
    randomly sited PMUs are added.
    """
    topo = topo or _cached_case(config.case)
    n, n_lines = topo.n_buses, len(topo.lines)
    draw_point = point if config.independent_draws else 0

    meters = substream(config.seed, _METERS, 0 if config.fixed_meters else trial)
    lines = sorted(meters.permutation(n_lines)[: _count(config.flow_coverage, n_lines)].tolist())
    angles = sorted((meters.permutation(n)[: _count(config.angle_coverage, n)] + 1).tolist())
    base = full_flow_measurements(topo, angles)
    if len(lines) < n_lines:
        keep = set(lines)
        ms = MeasurementSet()
        for meas in base:
            if meas.kind != "flow" or meas.target in keep:
                ms = ms.append(meas.kind, meas.target)
        base = ms

    order = substream(config.seed, _PROTECT, trial, draw_point).permutation(len(base))
    ms = base.protect(order[: _count(config.protect_fraction, len(base))].tolist())

    for bus, secure in config.pmu_buses:
        ms = expand_pmu(ms, bus, secure, topo)
    if config.pmu_count:
        explicit = {b for b, _ in config.pmu_buses}
        sites = [int(b) + 1 for b in substream(config.seed, _PMU, trial, draw_point).permutation(n)]
        sites = [b for b in sites if b not in explicit][: config.pmu_count]
        for bus in sites:
            ms = expand_pmu(ms, bus, config.pmu_secure, topo)
    return ms


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrialRow:
    sweep_value: float
    trial: int
    cardinality: int | None
    status: str


@dataclass(frozen=True)
class SweepRow:
    sweep_value: float
    mean: float | None
    min: int | None
    max: int | None
    infeasible_count: int
    trials: int


@dataclass(frozen=True)
class SweepResult:
    param: str
    rows: list[SweepRow]
    raw: list[TrialRow] = field(default_factory=list)

    @property
    def means(self) -> list[float | None]:
        return [r.mean for r in self.rows]


def _g6(x) -> str:
    return "" if x is None else f"{x:.6g}"


def _norm_value(param: str, v):
    return int(v) if param in ("pmu_count", "greedy_k") else float(_g6(float(v)))


def _status_of(card: int | None) -> str:
    if card is None:
        return INFEASIBLE
    return UNOBSERVABLE if card == 0 else OPTIMAL


def _evaluate(engine: str, topo: GridTopology, ms: MeasurementSet) -> tuple[int | None, str]:
    if engine == "mincut":
        res = optimal_attack(topo, ms)
        return res.cardinality, res.status
    if engine == "bruteforce":
        card = brute_force_attack(topo, ms).optimal_cardinality
        return card, _status_of(card)
    if engine == "l1":
        res = l1_attack(topo, ms, raise_on_infeasible=False)
        return res.cardinality, _status_of(res.cardinality)
    raise ValueError(f"unknown engine {engine!r}")


def _trial_job(job):
    config, topo, param, values, engine, trial = job
    if param == "greedy_k":
        ms = randomize_scenario(config, trial, topo)
        kmax = max(values)
        planner = greedy_protect if config.greedy_mode == "protect" else greedy_pmu
        plan = planner(topo, ms, kmax)
        out = []
        for v in values:
            if v == 0:
                res = plan.initial
                out.append(TrialRow(v, trial, res.cardinality, res.status))
            else:
                step = plan.steps[v - 1]
                status = INFEASIBLE if step.infeasible_after else _status_of(step.cardinality_after)
                out.append(TrialRow(v, trial, step.cardinality_after, status))
        return out
    out = []
    for point, v in enumerate(values):
        ms = randomize_scenario(replace(config, **{param: v}), trial, topo, point)
        card, status = _evaluate(engine, topo, ms)
        out.append(TrialRow(v, trial, card, status))
    return out


def aggregate(param: str, raw: list[TrialRow]) -> SweepResult:
    raw = sorted(raw, key=lambda r: (r.sweep_value, r.trial))
    rows = []
    for v in sorted({r.sweep_value for r in raw}):
        group = [r for r in raw if r.sweep_value == v]
        cards = [r.cardinality for r in group if r.cardinality is not None]
        infeasible = sum(r.status == INFEASIBLE for r in group)
        if cards:
            mean = float(_g6(sum(cards) / len(cards)))
            rows.append(SweepRow(v, mean, min(cards), max(cards), infeasible, len(group)))
        else:
            rows.append(SweepRow(v, None, None, None, infeasible, len(group)))
    return SweepResult(param, rows, raw)


def run_sweep(
    config: ScenarioConfig,
    param: str,
    values,
    engine: str = "mincut",
    workers: int | None = None,
    topo: GridTopology | None = None,
) -> SweepResult:
    """Run ``config.trials`` random scenarios per sweep value and aggregate.

    ``param`` is ``protect_fraction``, ``pmu_count`` or ``greedy_k``; greedy
    sweeps use ``config.greedy_mode`` and always score with the min-cut.
    ``topo`` overrides loading ``config.case``.
    """
    if param not in SWEEP_PARAMS:
        raise ValueError(f"cannot sweep {param!r}; choose from {', '.join(SWEEP_PARAMS)}")
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    values = sorted({_norm_value(param, v) for v in values})
    if param == "greedy_k" and engine != "mincut":
        raise ValueError("greedy sweeps are scored with the min-cut engine")
    topo = topo or _cached_case(config.case)
    if engine == "bruteforce" and topo.n_buses > 20:
        raise ValueError("brute force is limited to 20 buses")
    jobs = [(config, topo, param, values, engine, t) for t in range(config.trials)]
    if workers and workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            chunks = list(pool.map(_trial_job, jobs))
    else:
        chunks = [_trial_job(j) for j in jobs]
    return aggregate(param, [row for chunk in chunks for row in chunk])


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

RAW_HEADER = ["sweep_param", "sweep_value", "trial", "cardinality", "status"]
AGG_HEADER = ["sweep_param", "sweep_value", "mean", "min", "max", "infeasible_count", "trials"]


def aggregate_path(raw_path: str | Path) -> Path:
    raw_path = Path(raw_path)
    return raw_path.with_name(raw_path.stem + "_agg" + raw_path.suffix)


def write_csv(result: SweepResult, raw_path: str | Path, agg_path: str | Path | None = None) -> tuple[Path, Path]:
    raw_path = Path(raw_path)
    agg_path = Path(agg_path) if agg_path else aggregate_path(raw_path)
    with raw_path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RAW_HEADER)
        for r in result.raw:
            w.writerow([result.param, _g6(r.sweep_value), r.trial, _int_cell(r.cardinality), r.status])
    with agg_path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGG_HEADER)
        for r in result.rows:
            w.writerow([result.param, _g6(r.sweep_value), _g6(r.mean), _int_cell(r.min), _int_cell(r.max), r.infeasible_count, r.trials])
    return raw_path, agg_path


def _int_cell(x) -> str:
    return "" if x is None else str(int(x))


def _opt_int(s: str) -> int | None:
    return None if s == "" else int(s)


def read_csv(raw_path: str | Path, agg_path: str | Path | None = None) -> SweepResult:
    agg_path = Path(agg_path) if agg_path else aggregate_path(raw_path)
    with Path(raw_path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RAW_HEADER:
            raise ValueError(f"unexpected raw header {reader.fieldnames}")
        recs = list(reader)
    with agg_path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != AGG_HEADER:
            raise ValueError(f"unexpected aggregate header {reader.fieldnames}")
        aggs = list(reader)
    param = (recs or aggs)[0]["sweep_param"] if (recs or aggs) else ""
    raw = [
        TrialRow(_norm_value(param, r["sweep_value"]), int(r["trial"]), _opt_int(r["cardinality"]), r["status"])
        for r in recs
    ]
    rows = [
        SweepRow(
            _norm_value(param, r["sweep_value"]),
            None if r["mean"] == "" else float(r["mean"]),
            _opt_int(r["min"]),
            _opt_int(r["max"]),
            int(r["infeasible_count"]),
            int(r["trials"]),
        )
        for r in aggs
    ]
    return SweepResult(param, rows, raw)

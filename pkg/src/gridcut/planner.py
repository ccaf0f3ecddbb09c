"""Greedy defender planners: extra meter protection and secure PMU placement.

Both planners commit one choice per step, picking the candidate that leaves
the attacker the largest min-cut. Candidates are scanned in increasing id
order and only a strictly better score displaces the incumbent, so the first
maximiser wins.
"""

from __future__ import annotations

from concurrent.futures import Executor
from dataclasses import dataclass

from .attack import INFEASIBLE, OPTIMAL, UNOBSERVABLE, AttackResult, optimal_attack
from .errors import ExhaustedError
from .grid import GridTopology, MeasurementSet, expand_pmu


@dataclass(frozen=True)
class PlanStep:
    step_index: int
    chosen: int | None
    cardinality_after: int | None
    infeasible_after: bool
    kind: str = "measurement"

    def to_dict(self) -> dict:
        return {
            "step": self.step_index,
            "kind": self.kind,
            "chosen": self.chosen,
            "cardinality_after": self.cardinality_after,
            "infeasible_after": self.infeasible_after,
        }


@dataclass(frozen=True)
class Plan:
    steps: list[PlanStep]
    measurements: MeasurementSet
    initial: AttackResult
    final: AttackResult

    def to_list(self) -> list[dict]:
        return [s.to_dict() for s in self.steps]


def _best(candidates, evaluate, executor: Executor | None):
    """First candidate with the strictly highest score.

    ``executor`` may evaluate candidates concurrently (a thread pool; the
    evaluators are closures). The choice does not depend on completion order.
    """
    results = list(executor.map(evaluate, candidates)) if executor else [evaluate(c) for c in candidates]
    best = None
    for cand, (score, payload) in zip(candidates, results):
        if best is None or score > best[1]:
            best = (cand, score, payload)
    return best


def _pad(steps, start, k, kind, result, strict):
    if strict:
        raise ExhaustedError(f"full protection reached after {start - 1} of {k} steps")
    for i in range(start, k + 1):
        steps.append(PlanStep(i, None, result.cardinality, True, kind))


def greedy_protect(
    topo: GridTopology,
    ms: MeasurementSet,
    k: int,
    full_scan: bool = False,
    strict: bool = False,
    executor: Executor | None = None,
) -> Plan:
    """Protect ``k`` more measurements, one greedy step at a time.

    Each step only tries the meters the current optimal attack corrupts;
    protecting anything outside the cut cannot raise its value.
    ``full_scan`` tries every unprotected meter instead. If the attacker is
    locked out before ``k`` steps, the rest of the plan is padded with
    ``infeasible_after=True`` steps (or ``ExhaustedError`` if ``strict``).
    """
    if k < 0 or k > len(ms.unprotected_ids):
        raise ValueError(f"k={k} outside 0..{len(ms.unprotected_ids)} unprotected measurements")
    current = optimal_attack(topo, ms)
    if current.status == UNOBSERVABLE and k:
        raise ValueError("scenario is unobservable; protecting meters cannot help")
    initial = current
    steps: list[PlanStep] = []
    for i in range(1, k + 1):
        if current.status != OPTIMAL:
            _pad(steps, i, k, "measurement", current, strict)
            break
        candidates = ms.unprotected_ids if full_scan else sorted(current.attacked_measurements)

        def evaluate(j, ms=ms):
            res = optimal_attack(topo, ms.protect([j]))
            return res.score, res

        chosen, _, current = _best(candidates, evaluate, executor)
        ms = ms.protect([chosen])
        steps.append(PlanStep(i, chosen, current.cardinality, current.status == INFEASIBLE))
    return Plan(steps, ms, initial, current)


def greedy_pmu(
    topo: GridTopology,
    ms: MeasurementSet,
    k: int,
    strict: bool = False,
    executor: Executor | None = None,
) -> Plan:
    """Place ``k`` secure PMUs greedily; every bus not yet chosen is a candidate."""
    if k < 0 or k > topo.n_buses:
        raise ValueError(f"k={k} outside 0..{topo.n_buses} buses")
    current = optimal_attack(topo, ms)
    initial = current
    chosen_buses: list[int] = []
    steps: list[PlanStep] = []
    for i in range(1, k + 1):
        if current.status == INFEASIBLE:
            _pad(steps, i, k, "pmu", current, strict)
            break
        candidates = [b for b in topo.buses if b not in chosen_buses]

        def evaluate(bus, ms=ms):
            trial = expand_pmu(ms, bus, True, topo)
            res = optimal_attack(topo, trial)
            return res.score, (res, trial)

        bus, _, (current, ms) = _best(candidates, evaluate, executor)
        chosen_buses.append(bus)
        steps.append(PlanStep(i, bus, current.cardinality, current.status == INFEASIBLE, "pmu"))
    return Plan(steps, ms, initial, current)

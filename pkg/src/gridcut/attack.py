"""Minimum-cardinality hidden attacks via the attack graph's global min-cut."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import VerificationFailure
from .estimation import LeastSquaresEstimator
from .graph import AttackGraph, attack_graph
from .grid import GridTopology, MeasurementSet, build_measurement_matrix
from .mincut import global_min_cut, label_sides

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNOBSERVABLE = "unobservable"


@dataclass(frozen=True)
class AttackResult:
    """Optimal hidden attack ``a = H c``.

    ``cardinality`` is ``None`` when the status is infeasible (no non-zero
    ``c`` respects the protections). An unobservable scenario reports
    cardinality 0 with ``c`` marking the buses cut off from the reference.
    """

    status: str
    cardinality: int | None
    attacked_measurements: tuple[int, ...]
    c: np.ndarray
    a: np.ndarray

    @property
    def score(self) -> float:
        """Attacker cost as an orderable number; infeasible is +inf."""
        return math.inf if self.cardinality is None else float(self.cardinality)

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "cardinality": self.cardinality,
            "attacked_measurements": list(self.attacked_measurements),
            "c": [int(v) for v in self.c],
            "a": [float(v) for v in self.a],
        }


def _support(a: np.ndarray) -> tuple[int, ...]:
    return tuple(int(k) for k in np.flatnonzero(a))


def attack_from_graph(g: AttackGraph, H: np.ndarray) -> AttackResult:
    n = g.n_buses
    if g.infeasible:
        zero = np.zeros(n)
        return AttackResult(INFEASIBLE, None, (), zero.astype(np.int8), np.zeros(H.shape[0]))
    if not g.is_connected():
        reached = g.reachable(g.reference)
        c = np.array([0 if rep in reached else 1 for rep in g.supernode[:n]], dtype=np.int8)
        a = H @ c
        return AttackResult(UNOBSERVABLE, 0, _support(a), c, a)
    cut = global_min_cut(g)
    c = label_sides(g, cut)[:n]
    a = H @ c
    attacked = tuple(sorted(mid for k in cut.cut_edges for mid in g.edges[k].measurement_ids))
    return AttackResult(OPTIMAL, cut.value, attacked, c, a)


def optimal_attack(topo: GridTopology, ms: MeasurementSet) -> AttackResult:
    """Fewest meters an adversary must corrupt for an undetectable attack.

    Protected meters and protected states are contracted away, the global
    min-cut of what remains is the attack, and ``c`` is the indicator of the
    buses on the far side of the cut from the reference.
    """
    H = build_measurement_matrix(topo, ms).H
    return attack_from_graph(attack_graph(topo, ms), H)


# ---------------------------------------------------------------------------
# residual check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VerificationReport:
    trials: int
    max_residual_diff: float
    max_shift_error: float


def verify_hidden(
    topo: GridTopology,
    ms: MeasurementSet,
    result: AttackResult,
    trials: int = 1000,
    noise_sigma: float = 0.01,
    rng: np.random.Generator | int | None = 0,
    tol: float = 1e-8,
) -> VerificationReport:
    """Check that ``result.a`` is invisible to a least-squares estimator.

    Each trial draws angles uniformly on [-pi/6, pi/6] and Gaussian meter
    noise, then compares the residual norm and estimate with and without the
    attack. Raises ``VerificationFailure`` on the first trial that moves the
    residual or shifts the estimate by anything other than ``c``.
    """
    if result.status != OPTIMAL:
        raise ValueError(f"cannot verify an attack with status {result.status!r}")
    rng = np.random.default_rng(rng)
    est = LeastSquaresEstimator(build_measurement_matrix(topo, ms))
    a = np.asarray(result.a, dtype=float)
    c = np.asarray(result.c, dtype=float)
    n, m = topo.n_buses, len(ms)
    worst_res = worst_shift = 0.0
    for t in range(trials):
        x = rng.uniform(-np.pi / 6, np.pi / 6, n)
        z = est.H @ x + rng.normal(0.0, noise_sigma, m)
        x0, r0 = est.estimate(z)
        x1, r1 = est.estimate(z + a)
        res_diff = abs(r1 - r0)
        shift = float(np.max(np.abs(x1 - x0 - c)))
        worst_res = max(worst_res, res_diff)
        worst_shift = max(worst_shift, shift)
        if res_diff > tol or shift > tol:
            raise VerificationFailure(
                f"trial {t}: residual moved by {res_diff:.3e}, estimate shift off by {shift:.3e}", trial=t
            )
    return VerificationReport(trials, worst_res, worst_shift)

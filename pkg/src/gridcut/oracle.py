"""Ground-truth checks: exhaustive search, rank tests and the l1 baseline.

Nothing here goes through the attack graph except
``brute_force_protection``, which is a search over protection subsets and
scores each one with the min-cut engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .attack import optimal_attack
from .errors import LpInfeasible, TooLargeError
from .estimation import LeastSquaresEstimator, column_rank, least_squares_estimate  # noqa: F401
from .grid import GridTopology, MeasurementSet, build_measurement_matrix
from .simplex import OPTIMAL, solve_lp

MAX_WITNESSES = 100
_CHUNK = 1 << 15


@dataclass(frozen=True)
class OracleReport:
    """Exhaustive optimum over 0-1 state shifts.

    ``optimal_cardinality`` is ``None`` (and there are no witnesses) when
    the protections admit no non-zero shift at all.
    """

    optimal_cardinality: int | None
    optimal_c_witnesses: list[np.ndarray]
    enumerated_count: int

    @property
    def feasible(self) -> bool:
        return bool(self.optimal_c_witnesses)


def protection_rank(topo: GridTopology, ms: MeasurementSet) -> int:
    """Rank of the protected rows of H stacked with unit rows for protected states."""
    H = build_measurement_matrix(topo, ms).H
    rows = [H[k] for k in ms.protected_ids]
    for bus in sorted(ms.protected_states):
        unit = np.zeros(topo.n_buses)
        unit[bus - 1] = 1.0
        rows.append(unit)
    return column_rank(np.array(rows)) if rows else 0


def _bit_block(start: int, stop: int, n: int) -> np.ndarray:
    """Rows are the binary expansions of start..stop-1; column i is bit i (bus i+1)."""
    v = np.arange(start, stop, dtype=np.int64)[:, None]
    return ((v >> np.arange(n, dtype=np.int64)) & 1).astype(np.float64)


def brute_force_attack(topo: GridTopology, ms: MeasurementSet, max_n: int = 20) -> OracleReport:
    """Enumerate every non-zero 0-1 shift ``c`` and keep the sparsest ``H c``.

    ``c`` runs through the binary counter 1..2^n-1 with bus i as bit i-1.
    Candidates that move a protected state or a protected meter are skipped.
    Witnesses are kept in enumeration order, at most 100 of them.
    """
    n = topo.n_buses
    if n > max_n:
        raise TooLargeError(f"{n} buses exceeds the brute-force limit of {max_n}")
    H = build_measurement_matrix(topo, ms).H
    prot = np.array(ms.protected_ids, dtype=int)
    pinned = np.array(sorted(b - 1 for b in ms.protected_states), dtype=int)
    best = None
    witnesses: list[np.ndarray] = []
    total = (1 << n) - 1
    for start in range(1, total + 1, _CHUNK):
        C = _bit_block(start, min(start + _CHUNK, total + 1), n)
        ok = np.ones(len(C), dtype=bool)
        if pinned.size:
            ok &= ~C[:, pinned].any(axis=1)
        A = C @ H.T
        if prot.size:
            ok &= ~(A[:, prot] != 0).any(axis=1)
        if not ok.any():
            continue
        card = (A != 0).sum(axis=1)
        card[~ok] = np.iinfo(card.dtype).max
        low = int(card.min())
        if best is None or low < best:
            best, witnesses = low, []
        if low == best:
            for k in np.flatnonzero(card == best):
                if len(witnesses) >= MAX_WITNESSES:
                    break
                witnesses.append(C[k].astype(np.int8))
    return OracleReport(best, witnesses, total)


@dataclass(frozen=True)
class ProtectionReport:
    value: float
    subset: tuple[int, ...]
    evaluated: int


def brute_force_protection(topo: GridTopology, ms: MeasurementSet, k: int, limit: int = 10**6) -> ProtectionReport:
    """Best size-``k`` set of extra protections, scored by the attacker's min-cut.

    ``value`` is ``math.inf`` when the best subset leaves no hidden attack.
    Ties keep the lexicographically first subset.
    """
    pool = ms.unprotected_ids
    count = math.comb(len(pool), k)
    if count > limit:
        raise TooLargeError(f"C({len(pool)}, {k}) = {count} subsets exceeds {limit}")
    best_value, best_subset = -1.0, ()
    for subset in combinations(pool, k):
        value = optimal_attack(topo, ms.protect(subset)).score
        if value > best_value:
            best_value, best_subset = value, subset
    return ProtectionReport(best_value, best_subset, count)


# ---------------------------------------------------------------------------
# l1 relaxation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class L1Result:
    raw_a: np.ndarray | None
    thresholded_support: tuple[int, ...]
    cardinality: int | None
    lp_status: str
    objective: float | None = None
    raw_c: np.ndarray | None = None


def l1_lp(topo: GridTopology, ms: MeasurementSet, theta1: float = 1.0):
    """Standard-form data ``(cost, A_eq, b_eq, n_c)`` of the thresholded l1 program.

    Variables are ``[c (unpinned buses), a_plus (m), a_minus (m), surplus]``
    with ``H c - a_plus + a_minus = 0``, ``H_protected c = 0`` and
    ``sum(c) - surplus = theta1``. Pinned buses are dropped from ``c``.
    """
    H = build_measurement_matrix(topo, ms).H
    m, n = H.shape
    free = [i for i in range(n) if (i + 1) not in ms.protected_states]
    Hf = H[:, free]
    nc = len(free)
    prot = ms.protected_ids
    nv = nc + 2 * m + 1
    rows = m + len(prot) + 1
    A = np.zeros((rows, nv))
    A[:m, :nc] = Hf
    A[:m, nc : nc + m] = -np.eye(m)
    A[:m, nc + m : nc + 2 * m] = np.eye(m)
    for r, k in enumerate(prot):
        A[m + r, :nc] = Hf[k]
    A[-1, :nc] = 1.0
    A[-1, -1] = -1.0
    b = np.zeros(rows)
    b[-1] = theta1
    cost = np.zeros(nv)
    cost[nc : nc + 2 * m] = 1.0
    return cost, A, b, free


def l1_attack(
    topo: GridTopology,
    ms: MeasurementSet,
    theta1: float = 1.0,
    theta2: float = 1e-3,
    raise_on_infeasible: bool = True,
) -> L1Result:
    """Sparse-attack heuristic: minimise ||H c||_1 over c >= 0 with sum(c) >= theta1.

    The support is every entry with ``|a| > theta2``.
    """
    cost, A, b, free = l1_lp(topo, ms, theta1)
    sol = solve_lp(cost, A, b)
    if sol.status != OPTIMAL:
        if raise_on_infeasible:
            raise LpInfeasible(f"l1 program is {sol.status}")
        return L1Result(None, (), None, sol.status)
    m, n = len(ms), topo.n_buses
    nc = len(free)
    c = np.zeros(n)
    c[free] = sol.x[:nc]
    raw_a = sol.x[nc : nc + m] - sol.x[nc + m : nc + 2 * m]
    support = tuple(int(k) for k in np.flatnonzero(np.abs(raw_a) > theta2))
    return L1Result(raw_a, support, len(support), OPTIMAL, sol.objective, c)

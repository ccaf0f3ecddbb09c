"""Dense two-phase primal simplex with Bland's anti-cycling rule.

Solves ``min c @ x  s.t.  A @ x == b, x >= 0``. Intended for the small LPs of
the l1 attack baseline; the tableau is a dense numpy array.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpSolution:
    status: str
    x: np.ndarray | None = None
    objective: float | None = None
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    basis: tuple[int, ...] = ()
    iterations: int = 0


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    factor = T[:, col].copy()
    factor[row] = 0.0
    T -= np.outer(factor, T[row])


def _run(T: np.ndarray, basis: list[int], n_cols: int, tol: float, max_iter: int) -> tuple[str, int]:
    """Iterate on tableau ``T`` (cost row last) until optimal or unbounded."""
    for it in range(max_iter):
        d = T[-1, :n_cols]
        candidates = np.flatnonzero(d < -tol)
        if candidates.size == 0:
            return OPTIMAL, it
        col = int(candidates[0])
        column = T[:-1, col]
        rows = np.flatnonzero(column > tol)
        if rows.size == 0:
            return UNBOUNDED, it
        ratios = T[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + tol * max(1.0, abs(best))]
        row = int(min(ties, key=lambda r: basis[r]))
        _pivot(T, row, col)
        basis[row] = col
    raise RuntimeError(f"simplex did not converge in {max_iter} pivots")


def solve_lp(c, A_eq, b_eq, tol: float = 1e-9, max_iter: int = 100_000) -> LpSolution:
    c = np.asarray(c, dtype=float)
    A = np.array(A_eq, dtype=float, ndmin=2)
    b = np.array(b_eq, dtype=float)
    m, n = A.shape
    if c.shape != (n,) or b.shape != (m,):
        raise ValueError("inconsistent LP dimensions")
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    # phase one: artificial basis, minimise the artificial sum
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(n, n + m))
    _, it1 = _run(T, basis, n + m, tol, max_iter)
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    if -T[-1, -1] > tol * scale * max(1, m):
        return LpSolution(INFEASIBLE, iterations=it1)

    # drive remaining artificials out of the basis; drop redundant rows
    keep = []
    for r in range(m):
        if basis[r] >= n:
            nz = np.flatnonzero(np.abs(T[r, :n]) > tol)
            if nz.size == 0:
                continue
            _pivot(T, r, int(nz[0]))
            basis[r] = int(nz[0])
        keep.append(r)
    T = np.vstack([T[keep][:, list(range(n)) + [n + m]], np.zeros((1, n + 1))])
    basis = [basis[r] for r in keep]

    # phase two: reduced costs for the real objective
    cb = c[basis]
    T[-1, :n] = c - cb @ T[:-1, :n]
    T[-1, -1] = -cb @ T[:-1, -1]
    status, it2 = _run(T, basis, n, tol, max_iter)
    if status != OPTIMAL:
        return LpSolution(status, iterations=it1 + it2)

    x = np.zeros(n)
    x[basis] = T[:-1, -1]
    x[np.abs(x) < tol] = 0.0
    # duals solve B^T y = c_B over all rows; with redundant rows y is not
    # unique but A^T y is, so any solution certifies optimality
    y = np.zeros(m)
    if basis:
        y = np.linalg.lstsq(A[:, basis].T, c[basis], rcond=None)[0]
    y[neg] *= -1
    A_orig = np.array(A_eq, dtype=float, ndmin=2)
    reduced = c - A_orig.T @ y
    return LpSolution(OPTIMAL, x, float(c @ x), y, reduced, tuple(basis), it1 + it2)

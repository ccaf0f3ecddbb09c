"""Least-squares state estimation for the DC model."""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

from .errors import RankError
from .grid import MeasurementMatrix


def column_rank(H: np.ndarray) -> int:
    if H.size == 0:
        return 0
    return int(np.linalg.matrix_rank(H))


class LeastSquaresEstimator:
    """QR-factored estimator, reusable across many measurement vectors."""

    def __init__(self, H: MeasurementMatrix | np.ndarray):
        H = np.asarray(getattr(H, "H", H), dtype=float)
        m, n = H.shape
        if m < n or column_rank(H) < n:
            raise RankError(f"measurement matrix ({m}x{n}) does not have full column rank {n}")
        self.H = H
        self._q, self._r = np.linalg.qr(H)

    def estimate(self, z) -> tuple[np.ndarray, float]:
        z = np.asarray(z, dtype=float)
        x = solve_triangular(self._r, self._q.T @ z)
        return x, float(np.linalg.norm(z - self.H @ x))


def least_squares_estimate(H: MeasurementMatrix | np.ndarray, z) -> tuple[np.ndarray, float]:
    """Return ``(x_hat, ||z - H x_hat||)``; raises ``RankError`` if H is rank deficient."""
    return LeastSquaresEstimator(H).estimate(z)

"""Gauss-Legendre quadrature on boxes with node doubling."""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import NumericError


@lru_cache(maxsize=32)
def _nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def gauss_legendre_2d(
    func: Callable[[np.ndarray, np.ndarray], np.ndarray],
    box: tuple[float, float, float, float],
    n: int,
) -> float:
    x_lo, x_hi, y_lo, y_hi = box
    t, wt = _nodes(n)
    x = 0.5 * (x_hi - x_lo) * t + 0.5 * (x_hi + x_lo)
    y = 0.5 * (y_hi - y_lo) * t + 0.5 * (y_hi + y_lo)
    xx, yy = np.meshgrid(x, y, indexing="ij")
    vals = func(xx, yy)
    scale = 0.25 * (x_hi - x_lo) * (y_hi - y_lo)
    return float(scale * (wt @ vals @ wt))


def adaptive_2d(
    func: Callable[[np.ndarray, np.ndarray], np.ndarray],
    box: tuple[float, float, float, float],
    tol: float = 1e-9,
    n0: int = 32,
    n_max: int = 2048,
) -> tuple[float, float]:
    """Double the node count until two successive rules agree to ``tol``.

    Returns (value, last difference).
    """
    n = n0
    prev = gauss_legendre_2d(func, box, n)
    while n < n_max:
        n *= 2
        cur = gauss_legendre_2d(func, box, n)
        diff = abs(cur - prev)
        if diff <= tol:
            return cur, diff
        prev = cur
    raise NumericError(f"2D quadrature did not reach tol={tol} with {n_max} nodes per axis")

"""Empirical checks of the family-average lemmas along a grid of X."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import numtheory as nt
from .constants import c1_integral, c_constants, d_constants
from .errors import DomainError
from .families import FamilyParams, WeightFunction, conductors, default_weight, family_arrays, scale

DEFAULT_GRID = (1e6, 10**7.5, 1e9)
NOISE_TOLERANCE = 0.20


@dataclass(frozen=True)
class ConvergenceRow:
    X: float
    observed: float
    predicted: float
    ratio: float
    residual_scaled: float
    note: str = ""

    def as_dict(self) -> dict:
        return asdict(self)


def _row(X, observed, predicted, residual_scaled, note="") -> ConvergenceRow:
    ratio = observed / predicted if predicted != 0 else math.nan
    return ConvergenceRow(float(X), observed, predicted, ratio, residual_scaled, note)


def _members(params: FamilyParams, weight: WeightFunction | None, X: float):
    scaled = scale(params, X, weight)
    a, b, w = family_arrays(scaled)
    return scaled, a, b, w, math.fsum(w.tolist())


def _check_grid(grid) -> list[float]:
    grid = [float(x) for x in grid]
    if len(grid) < 2 or any(x >= y for x, y in zip(grid, grid[1:])):
        raise DomainError("X grid must be strictly ascending with at least two points")
    return grid


def decays(values, tolerance: float = NOISE_TOLERANCE) -> bool:
    """Each |value| is at most (1 + tolerance) times its predecessor."""
    mags = [abs(v) for v in values]
    return all(b <= (1 + tolerance) * a for a, b in zip(mags, mags[1:]))


def family_size_check(params: FamilyParams, weight: WeightFunction | None = None, X_grid=DEFAULT_GRID) -> list[ConvergenceRow]:
    """W_X against M(F) = AB gamma(q^2) / (k zeta(2)) times the weight mass."""
    rows = []
    for X in _check_grid(X_grid):
        scaled, _, _, _, W = _members(params, weight, X)
        M = scaled.predicted_size() * scaled.weight.mass
        rows.append(_row(X, W, M, W / M - 1))
    return rows


def p_divides_density_check(params: FamilyParams, weight: WeightFunction | None, X: float, p: int) -> ConvergenceRow:
    """Weighted share of members with p | a, against 1/(p + 1)."""
    if p == 2 or params.q % p == 0 or not nt.is_prime(p):
        raise DomainError(f"p = {p} must be an odd prime not dividing 2q = {2 * params.q}")
    scaled, a, _, w, W = _members(params, weight, X)
    obs = math.fsum(w[a % p == 0].tolist()) / W
    pred = 1 / (p + 1)
    x_lo, x_hi = scaled.weight.support[:2]
    window = scaled.A * (x_hi - x_lo) / params.modulus
    note = "out of asymptotic range: fewer than 10 multiples of p in the a-window" if window < 10 * p else ""
    return _row(X, obs, pred, obs - pred, note)


def avg_log_conductor_check(params: FamilyParams, weight: WeightFunction | None = None, X_grid=DEFAULT_GRID) -> list[ConvergenceRow]:
    """Weighted mean of log N / log X against 1 + (d_1 + c_1)/log X."""
    weight = weight or default_weight()
    c1 = c_constants(params.family, weight).c[1]
    d1 = d_constants(params.family, params.q)[1]
    rows = []
    for X in _check_grid(X_grid):
        _, a, b, w, W = _members(params, weight, X)
        L = math.log(X)
        logN = np.log(conductors(params.family, a, b).astype(np.float64)) / L
        obs = math.fsum((logN * w).tolist()) / W
        pred = 1 + (d1 + c1) / L
        rows.append(_row(X, obs, pred, (obs - pred) * L))
    return rows


def log_radical_check(params: FamilyParams, weight: WeightFunction | None = None, X: float = 1e9, P: int = 10**6) -> ConvergenceRow:
    """Mean of log a* against log A + int int log x w - sum_{p not | 2q} log p/(p^2 - 1)."""
    weight = weight or default_weight()
    scaled, a, _, w, W = _members(params, weight, X)
    rad = nt.RadicalTable(int(np.abs(a).max()))
    obs = math.fsum((np.log(rad(a).astype(np.float64)) * w).tolist()) / W
    pr = nt.sieve(P).primes
    pr = pr[(pr > 2) & (params.q % pr != 0)].astype(np.float64)
    prime_sum = math.fsum((np.log(pr) / (pr * pr - 1)).tolist())
    integral = weight.integrate(lambda x, y: np.log(x)) / weight.mass
    pred = math.log(scaled.A) + integral - prime_sum
    return _row(X, obs, pred, obs - pred)


__all__ = [
    "ConvergenceRow", "DEFAULT_GRID", "avg_log_conductor_check", "c1_integral", "decays",
    "family_size_check", "log_radical_check", "p_divides_density_check",
]

"""Complete character sums over residue pairs (a, b) mod p.

Everything here is exact: a_p values are integers, prime-power
coefficients are carried as A(p^v) = lambda(p^v) p^(v/2), and sums over
the p^2 residue pairs are big integers or Fractions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import numtheory as nt
from .errors import DomainError, ResourceError
from .families import F1, FamilyId, ScaledFamily, ap_power, family_arrays, family_by_name

PRIME_CAP = 5000
MAX_NU = 12


def _check_prime(p: int, cap: int) -> None:
    if p < 3 or not nt.is_prime(p):
        raise DomainError(f"{p} is not an odd prime")
    if p > cap:
        raise ResourceError(f"p = {p} exceeds the residue-table cap {cap}")


def _correlate(u: np.ndarray, chi: np.ndarray) -> np.ndarray:
    """out[c] = sum_x u[x] chi[(x + c) mod p], exact for integer inputs."""
    fu = np.fft.rfft(u.astype(np.float64))
    fc = np.fft.rfft(chi.astype(np.float64))
    out = np.fft.irfft(np.conj(fu) * fc, n=len(u))
    return np.rint(out).astype(np.int64)


def _row(family: FamilyId, alpha: int, p: int, chi: np.ndarray) -> np.ndarray:
    """a_p(alpha, b) for every b mod p."""
    x = np.arange(p, dtype=np.int64)
    if family is F1:
        # f = x (x - alpha) (x + 2b)
        u = chi[(x * (x - alpha)) % p]
        corr = _correlate(u, chi)
        return -corr[(2 * x) % p]
    # f = x ((x + alpha)^2 - (alpha^2 + b))
    s = ((x + alpha) ** 2) % p
    U = np.zeros(p, dtype=np.int64)
    np.add.at(U, s, chi[x].astype(np.int64))
    corr = _correlate(U, chi)
    return -corr[(-(alpha * alpha + x)) % p]


@dataclass(frozen=True)
class ApTable:
    """a_p and the bad-reduction flag for every residue pair (a mod p, b mod p)."""

    family: FamilyId
    p: int
    ap: np.ndarray = field(repr=False)  # shape (p, p), indexed [a, b]
    bad: np.ndarray = field(repr=False)

    def __getitem__(self, ab: tuple[int, int]) -> tuple[int, bool]:
        a, b = ab
        return int(self.ap[a % self.p, b % self.p]), bool(self.bad[a % self.p, b % self.p])

    def histogram(self) -> dict[tuple[int, bool], int]:
        bound = 2 * math.isqrt(self.p) + 2
        key = 2 * (self.ap.astype(np.int64) + bound) + self.bad
        counts = np.bincount(key.ravel(), minlength=2 * (2 * bound + 1))
        out = {}
        for k in np.flatnonzero(counts).tolist():
            out[(k // 2 - bound, bool(k % 2))] = int(counts[k])
        return dict(sorted(out.items()))


def bad_mask(family, p: int) -> np.ndarray:
    family = family_by_name(family)
    a = np.arange(p, dtype=np.int64)[:, None]
    b = np.arange(p, dtype=np.int64)[None, :]
    if family is F1:
        return (a * b % p) * ((a + 2 * b) % p) % p == 0
    return (b * ((a * a + b) % p)) % p == 0


def _build_table(name: str, p: int) -> ApTable:
    family = family_by_name(name)
    chi = nt.legendre_table(p)
    table = np.empty((p, p), dtype=np.int16)
    table[0] = _row(family, 0, p, chi)
    base = _row(family, 1, p, chi)
    a = np.arange(1, p, dtype=np.int64)
    inv = np.array([pow(int(v), -1, p) for v in a], dtype=np.int64)
    b = np.arange(p, dtype=np.int64)
    # F1: a_p(e a, e b) = (e/p) a_p(a, b);  F2: a_p(e a, e^2 b) = (e/p) a_p(a, b)
    scale = inv if family is F1 else (inv * inv) % p
    idx = (b[None, :] * scale[:, None]) % p
    table[1:] = chi[a][:, None].astype(np.int16) * base[idx].astype(np.int16)
    table.setflags(write=False)
    bad = bad_mask(family, p)
    bad.setflags(write=False)
    return ApTable(family, p, table, bad)


@lru_cache(maxsize=64)
def _ap_table_cached(name: str, p: int) -> ApTable:
    return _build_table(name, p)


def ap_table(family, p: int, cap: int = PRIME_CAP) -> ApTable:
    family = family_by_name(family)
    _check_prime(p, cap)
    return _ap_table_cached(family.name, p)


@lru_cache(maxsize=8192)
def _histogram_cached(name: str, p: int) -> tuple[tuple[int, bool, int], ...]:
    # built fresh: large tables are not worth keeping once counted
    hist = _build_table(name, p).histogram()
    return tuple((a, bad, n) for (a, bad), n in hist.items())


def ap_histogram(family, p: int, cap: int = PRIME_CAP) -> tuple[tuple[int, bool, int], ...]:
    """((a_p, bad, count), ...) over all p^2 residue pairs."""
    family = family_by_name(family)
    _check_prime(p, cap)
    return _histogram_cached(family.name, p)


@dataclass(frozen=True)
class ExactMoment:
    """value = numerator / p^(half_power / 2)."""

    numerator: int
    half_power: int
    p: int
    v: int

    def as_fraction(self) -> Fraction:
        if self.half_power % 2:
            if self.numerator:
                raise ValueError("odd half-power with nonzero numerator is irrational")
            return Fraction(0)
        return Fraction(self.numerator, self.p ** (self.half_power // 2))

    def __float__(self) -> float:
        return self.numerator / self.p ** (self.half_power / 2)

    def __str__(self) -> str:
        if self.half_power % 2 == 0 or self.numerator == 0:
            f = self.as_fraction()
            return f"{f.numerator}/{f.denominator}"
        return f"{self.numerator}/{self.p}^({self.half_power}/2)"


def Q_exact(family, p: int, v: int, cap: int = PRIME_CAP) -> ExactMoment:
    """Sum of lambda(p^v) over all residue pairs mod p."""
    if v < 1 or v > MAX_NU:
        raise DomainError(f"v must lie in [1, {MAX_NU}], got {v}")
    total = sum(n * ap_power(a, p, v, bad) for a, bad, n in ap_histogram(family, p, cap))
    return ExactMoment(total, v, p, v)


def second_moment(family, p: int, cap: int = PRIME_CAP) -> Fraction:
    """Sum of lambda(p)^2 over all residue pairs mod p."""
    return Fraction(sum(n * a * a for a, _, n in ap_histogram(family, p, cap)), p)


def good_pair_count(family, p: int) -> int:
    """Residue pairs of good reduction: (p-1)(p-2) for F1, (p-1)^2 for F2."""
    family = family_by_name(family)
    return (p - 1) * (p - 2) if family is F1 else (p - 1) ** 2


def local_factor_sum(family, p: int, cap: int = PRIME_CAP) -> Fraction:
    """Sum over residue pairs of (1 - lambda/sqrt(p) + chi/p)^(-1) - 1.

    With lambda/sqrt(p) = a_p/p each term is (a_p - chi)/(p - a_p + chi).
    """
    total = Fraction(0)
    for a, bad, n in ap_histogram(family, p, cap):
        chi = 0 if bad else 1
        total += Fraction(n * (a - chi), p - a + chi)
    return total


def q_series_sum(family, p: int, l_max: int, cap: int = PRIME_CAP) -> Fraction:
    """sum_{l=1}^{l_max} Q(p^(2l)) / p^l, the truncated series form of the local sum."""
    return sum((Q_exact(family, p, 2 * l, cap).as_fraction() / p**l for l in range(1, l_max + 1)), Fraction(0))


def weighted_moment_V(scaled: ScaledFamily, p: int, v: int) -> float:
    """sum over the family of lambda_{a,b}(p^v) w(a/A, b/B)."""
    q = scaled.params.q
    if p == 2 or q % p == 0:
        raise DomainError(f"p = {p} must not divide 2q = {2 * q}")
    a, b, w = family_arrays(scaled)
    if v == 0:
        return math.fsum(w.tolist())
    table = ap_table(scaled.family, p)
    aps = table.ap[a % p, b % p].astype(np.int64)
    bad = table.bad[a % p, b % p]
    coeff = {}
    for val in np.unique(aps).tolist():
        for flag in (False, True):
            coeff[(val, flag)] = ap_power(val, p, v, flag) / p ** (v / 2)
    lam = np.array([coeff[(x, f)] for x, f in zip(aps.tolist(), bad.tolist())])
    return math.fsum((lam * w).tolist())

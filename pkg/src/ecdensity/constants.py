"""The lower-order constants c_1..c_6, d_1..d_6(q), e(a0, b0) and the assembled prediction.

Prime sums run over odd primes up to a cutoff and carry a tail field.
For the sums weighted by log p / p^k the tail is bounded with
theta(x) < 1.01624 x, which gives sum_{p > P} log p / p^k <= 1.01624 k/(k-1) P^(1-k).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import charsums as cs
from . import numtheory as nt
from .errors import DomainError
from .families import (
    F1,
    FamilyId,
    ScaledFamily,
    WeightFunction,
    ap,
    default_weight,
    family_by_name,
    validate_and_residues,
)

EULER_GAMMA = 0.57721566490153286061
THETA_RATIO = 1.01624  # theta(x) < 1.01624 x for all x > 0


@dataclass(frozen=True)
class TruncationParams:
    P: int = 10**6
    P_Q: int = 2000
    L_max: int = 5
    T: int = 10**8
    quad_tol: float = 1e-9

    def __post_init__(self):
        if self.P < 100:
            raise DomainError(f"P must be >= 100, got {self.P}")
        if self.L_max < 2:
            raise DomainError(f"L_max must be >= 2, got {self.L_max}")
        if self.T < 10**4:
            raise DomainError(f"T must be >= 10^4, got {self.T}")
        if self.P_Q < 3:
            raise DomainError(f"P_Q must be >= 3, got {self.P_Q}")
        if not self.quad_tol > 0:
            raise DomainError("quad_tol must be positive")


@dataclass
class ConstantsReport:
    family: FamilyId
    q: int
    c: dict[int, float] = field(default_factory=dict)
    d: dict[int, float] = field(default_factory=dict)
    e: float = 0.0
    tails: dict[str, float] = field(default_factory=dict)
    provenance: TruncationParams = field(default_factory=TruncationParams)
    diagnostics: dict[str, object] = field(default_factory=dict)

    @property
    def sum_c(self) -> float:
        return math.fsum(self.c.values())

    @property
    def sum_d(self) -> float:
        return math.fsum(self.d.values())

    def as_dict(self) -> dict:
        return {
            "family": self.family.name,
            "q": self.q,
            "c": {str(k): v for k, v in sorted(self.c.items())},
            "sum_c": self.sum_c,
            "d": {str(k): v for k, v in sorted(self.d.items())},
            "sum_d": self.sum_d,
            "e": self.e,
            "tails": dict(sorted(self.tails.items())),
            "provenance": asdict(self.provenance),
        }


def _log_power_tail(P: int, k: int) -> float:
    """Upper bound for sum_{p > P} log p / p^k."""
    return THETA_RATIO * k / (k - 1) * float(P) ** (1 - k)


def _odd_primes(P: int) -> np.ndarray:
    pr = nt.sieve(P).primes
    return pr[pr > 2].astype(np.float64)


@lru_cache(maxsize=8)
def _prime_sums(P: int) -> dict[str, float]:
    """The four convergent odd-prime sums shared by c_1, c_3, c_4, c_6."""
    p = _odd_primes(P)
    lp = np.log(p)
    return {
        "S_c1": math.fsum((lp / (p * p - 1)).tolist()),
        "S_c3": math.fsum((lp / ((p * p - 1) * (p + 1))).tolist()),
        "S_c4": math.fsum((lp / (p * (p + 1))).tolist()),
        "S_c6": math.fsum((lp / (p * (p + 1) ** 2)).tolist()),
    }


def c2_constant() -> float:
    return -2 * math.log(2 * math.pi) - 2 * EULER_GAMMA


def c1_integral(family, weight: WeightFunction, tol: float = 1e-9) -> float:
    """int int log(2^5 x y (x+2y)) w  (F1)  or  log(2^6 y (x^2+y)) w  (F2)."""
    family = family_by_name(family)
    if family is F1:
        g = lambda x, y: np.log(32.0 * x * y * (x + 2 * y))  # noqa: E731
    else:
        g = lambda x, y: np.log(64.0 * y * (x * x + y))  # noqa: E731
    return weight.integrate(g, tol=tol)


@lru_cache(maxsize=8)
def _theta(T: int, threads: int = 1):
    return nt.theta_and_r_integral(T, threads=threads)


@lru_cache(maxsize=8)
def _c5_terms(name: str, P_Q: int) -> tuple[tuple[int, Fraction], ...]:
    return tuple((p, cs.local_factor_sum(name, p)) for p in nt.odd_primes_upto(P_Q))


def c5_local_factor(family, P_Q: int) -> tuple[float, float]:
    """c_5 from the local-factor form, with a fitted heuristic tail."""
    family = family_by_name(family)
    terms = _c5_terms(family.name, P_Q)
    vals = [-2 * math.log(p) / (p * (p + 1)) * float(s) for p, s in terms]
    total = math.fsum(vals)
    # |term| behaves like C log p / p^3; take C from the upper half of the range
    upper = [(p, v) for (p, _), v in zip(terms, vals) if p > P_Q // 2]
    C = max((abs(v) * p**3 / math.log(p) for p, v in upper), default=0.0)
    return total, C * _log_power_tail(P_Q, 3)


def c5_q_series(family, P_Q: int, L_max: int) -> float:
    """c_5 from -2 sum_p log p/(p+1) sum_{l <= L_max} Q(p^(2l)) / p^(l+1)."""
    family = family_by_name(family)
    vals = [
        -2 * math.log(p) / (p * (p + 1)) * float(cs.q_series_sum(family, p, L_max))
        for p in nt.odd_primes_upto(P_Q)
    ]
    return math.fsum(vals)


def c_constants(
    family, weight: WeightFunction | None = None, trunc: TruncationParams | None = None, threads: int = 1
) -> ConstantsReport:
    """c_1..c_6; ``threads`` only parallelises the theta sieve and never changes the result."""
    family = family_by_name(family)
    weight = weight or default_weight()
    trunc = trunc or TruncationParams()
    return _c_constants_cached(family.name, weight, trunc, threads)


@lru_cache(maxsize=16)
def _c_constants_cached(name: str, weight: WeightFunction, trunc: TruncationParams, threads: int) -> ConstantsReport:
    family = family_by_name(name)
    delta = family.delta
    sums = _prime_sums(trunc.P)
    th = _theta(trunc.T, threads)
    c5, c5_tail = c5_local_factor(family, trunc.P_Q)
    integral = c1_integral(family, weight, trunc.quad_tol)

    c = {
        1: integral - delta * sums["S_c1"],
        2: c2_constant(),
        3: -2 * delta * sums["S_c3"],
        4: 2 * (1 + th.r_integral - delta * sums["S_c4"] - math.log(2)),
        5: c5,
        6: 2 * delta * sums["S_c6"],
    }
    tails = {
        "c1": delta * _log_power_tail(trunc.P, 2) + trunc.quad_tol,
        "c2": 0.0,
        "c3": 2 * delta * _log_power_tail(trunc.P, 3),
        "c4": 2 * (th.tail_estimate + delta * _log_power_tail(trunc.P, 2)),
        "c5": c5_tail,
        "c6": 2 * delta * _log_power_tail(trunc.P, 3),
    }
    # Alternative readings of c_4, reported for comparison only.
    c4_p2_once = 2 * (1 + th.r_integral - delta * sums["S_c4"]) - math.log(2)
    diagnostics = {
        "c1_weight_integral": integral,
        "r_integral": th.r_integral,
        "theta_T_over_T": th.theta_T / th.T,
        "c4_p2_removed_once": c4_p2_once,
        "c4_without_theta_boundary": c[4] + 2 * th.theta_T / th.T,
        "d2_flag": "d_2 is named in the main density statement but never defined; held at 0",
    }
    return ConstantsReport(family, 1, c, {k: 0.0 for k in range(1, 7)}, 0.0, tails, trunc, diagnostics)


def q_series_truncation_bound(family, P_Q: int, L_max: int) -> float:
    """Bound on the l > L_max part of the Q-series form of c_5.

    |lambda(p^2l)| <= 2l + 1 at good pairs and = p^-l at bad ones, so
    |Q(p^2l)| <= (2l + 1) G + B p^-l with G good and B bad residue pairs.
    """
    family = family_by_name(family)
    total = []
    for p in nt.odd_primes_upto(P_Q):
        G = cs.good_pair_count(family, p)
        B = p * p - G
        # closed forms of sum_{l > L} (2l+1) x^l with x = 1/p, and sum_{l > L} x^(2l)
        x = 1.0 / p
        lin = x ** (L_max + 1) * ((2 * L_max + 3) - (2 * L_max + 1) * x) / (1 - x) ** 2
        x2 = x * x
        geo2 = x2 ** (L_max + 1) / (1 - x2)
        total.append(2 * math.log(p) / (p * (p + 1)) * (G * lin + B * geo2))
    return math.fsum(total)


def c5_cross_check(family, P_Q: int = 500, L_max: int = 5) -> dict[str, float]:
    """Compare the local-factor and truncated Q-series forms of c_5 over p <= P_Q."""
    family = family_by_name(family)
    lf = math.fsum(-2 * math.log(p) / (p * (p + 1)) * float(s) for p, s in _c5_terms(family.name, P_Q))
    qs = c5_q_series(family, P_Q, L_max)
    return {
        "local_factor": lf,
        "q_series": qs,
        "difference": abs(lf - qs),
        "truncation_bound": q_series_truncation_bound(family, P_Q, L_max),
    }


def d_constants(family, q: int, trunc: TruncationParams | None = None) -> dict[int, float]:
    """Finite sums over p | q; d_2 is identically zero."""
    family = family_by_name(family)
    if q <= 0 or q % 2 == 0:
        raise DomainError(f"q must be odd and positive, got {q}")
    delta = family.delta
    d = {k: [] for k in range(1, 7)}
    for p in nt.prime_factors(q):
        lp = math.log(p)
        d[1].append(delta * lp / (p * p - 1))
        d[3].append(2 * delta * lp / ((p * p - 1) * (p + 1)))
        d[4].append(2 * delta * lp / (p * (p + 1)))
        d[5].append(2 * lp / (p * (p + 1)) * float(cs.local_factor_sum(family, p)))
        d[6].append(-2 * delta * lp / (p * (p + 1) ** 2))
    return {k: math.fsum(v) for k, v in d.items()}


def e_local_term(family, a0: int, b0: int, p: int) -> Fraction:
    """(1 - lambda(p)/sqrt(p) + 1/p)^(-1) - 1 = (a_p - 1)/(p - a_p + 1)."""
    a_p = ap(family, a0, b0, p)
    return Fraction(a_p - 1, p - a_p + 1)


def e_constant(family, q: int, a0: int, b0: int) -> float:
    family = family_by_name(family)
    validate_and_residues(family, q, a0, b0)
    terms = [
        -2 * math.log(p) * (1 - 1 / p) * float(e_local_term(family, a0, b0, p))
        for p in nt.prime_factors(q)
    ]
    return math.fsum(terms)


def constants_report(
    family, q: int = 1, a0: int = 1, b0: int = 1, weight: WeightFunction | None = None,
    trunc: TruncationParams | None = None, threads: int = 1,
) -> ConstantsReport:
    """Every constant for F_i(q; a0, b0)."""
    family = family_by_name(family)
    validate_and_residues(family, q, a0, b0)
    base = c_constants(family, weight, trunc, threads)
    return ConstantsReport(
        family,
        q,
        dict(base.c),
        d_constants(family, q, trunc),
        e_constant(family, q, a0, b0),
        dict(base.tails),
        base.provenance,
        dict(base.diagnostics),
    )


def predicted_density(scaled: ScaledFamily, test, trunc: TruncationParams | None = None) -> float:
    """phi(0)/2 + phihat(0) + phihat(0)/log X * (e + sum d + sum c)."""
    fam = scaled.family
    if not 0 < test.rho < fam.support_bound:
        raise DomainError(f"support {test.rho} outside (0, {fam.support_bound:.4f}) for {fam}")
    pr = scaled.params
    rep = constants_report(fam, pr.q, pr.a0, pr.b0, scaled.weight, trunc)
    lower = rep.e + rep.sum_d + rep.sum_c
    return 0.5 * test.phi0 + test.phihat0 + test.phihat0 / math.log(scaled.X) * lower

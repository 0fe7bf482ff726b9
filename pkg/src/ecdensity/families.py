"""The two Weierstrass families, their scaling and per-curve invariants.

F1: y^2 = x(x - a)(x + 2b),  a, b odd and coprime.
F2: y^2 = x(x^2 + 2ax - b),  a = b = 1 (mod 4), coprime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterator

import numpy as np
from scipy import integrate

from . import numtheory as nt
from .errors import AdmissibilityError, DomainError
from .quadrature import adaptive_2d


@dataclass(frozen=True)
class FamilyId:
    name: str
    delta: int  # independent conductor factors
    two_exponent: int  # congruences are taken modulo 2**two_exponent * q
    support_bound: float
    a_exponent: float  # A = X**a_exponent
    b_exponent: float
    size_divisor: int  # M = AB gamma(q^2) / (size_divisor * zeta(2))
    conductor_two_power: int

    @property
    def modulus_two(self) -> int:
        return 2**self.two_exponent

    def __str__(self) -> str:
        return self.name


F1 = FamilyId("F1", 3, 1, 2 / 3, 1 / 3, 1 / 3, 3, 5)
F2 = FamilyId("F2", 2, 2, 1 / 2, 1 / 4, 1 / 2, 12, 6)
FAMILIES = {"F1": F1, "F2": F2, "f1": F1, "f2": F2}


def family_by_name(name: str | FamilyId) -> FamilyId:
    if isinstance(name, FamilyId):
        return name
    try:
        return FAMILIES[name]
    except KeyError:
        raise DomainError(f"unknown family {name!r}; expected f1 or f2") from None


def bad_expression(family: FamilyId, a: int, b: int) -> int:
    """The integer whose odd prime divisors are exactly the odd primes dividing N."""
    if family is F1:
        return a * b * (a + 2 * b)
    return b * (a * a + b)


def cubic_coefficients(family: FamilyId, a: int, b: int) -> tuple[int, int]:
    """(c2, c1) with f(x) = x^3 + c2 x^2 + c1 x."""
    if family is F1:
        return 2 * b - a, -2 * a * b
    return 2 * a, -b


# -- congruence data -------------------------------------------------------


@dataclass(frozen=True)
class FamilyParams:
    family: FamilyId
    q: int
    a0: int
    b0: int
    r: int  # a = r (mod 2^i q)
    t: int  # b = t (mod 2^i q)

    @property
    def modulus(self) -> int:
        return self.family.modulus_two * self.q


def validate_and_residues(family, q: int, a0: int, b0: int) -> FamilyParams:
    family = family_by_name(family)
    if q <= 0 or q % 2 == 0:
        raise DomainError(f"q must be odd and positive, got {q}")
    g = math.gcd(q, bad_expression(family, a0, b0))
    if g != 1:
        p = nt.prime_factors(g)[0]
        expr = "a0*b0*(a0+2*b0)" if family is F1 else "b0*(a0^2+b0)"
        raise AdmissibilityError(f"{family}: prime {p} divides gcd(q, {expr})", prime=p)
    m2 = family.modulus_two
    r, _ = nt.crt_pair(a0 % q, q, 1, m2)
    t, _ = nt.crt_pair(b0 % q, q, 1, m2)
    return FamilyParams(family, q, a0 % q if q > 1 else a0, b0 % q if q > 1 else b0, r, t)


def prime_family(family) -> FamilyParams:
    """F1' = F1(1, 1; 1), F2' = F2(1, 1; 1)."""
    return validate_and_residues(family, 1, 1, 1)


# -- weights ---------------------------------------------------------------


def _bump(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1
    out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    return out


@lru_cache(maxsize=1)
def _bump_mass_1d() -> float:
    # mass of exp(-1/(1-(2x-3)^2)) over x in [1, 2]
    val, _ = integrate.quad(lambda x: float(_bump(np.array(2 * x - 3))), 1, 2, epsabs=1e-14, epsrel=1e-13)
    return val


@dataclass(frozen=True)
class WeightFunction:
    name: str
    func: Callable[[np.ndarray, np.ndarray], np.ndarray] = field(repr=False, compare=False)
    support: tuple[float, float, float, float]

    def __call__(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        x_lo, x_hi, y_lo, y_hi = self.support
        inside = (x >= x_lo) & (x <= x_hi) & (y >= y_lo) & (y <= y_hi)
        return np.where(inside, self.func(x, y), 0.0)

    def integrate(self, g=None, tol: float = 1e-9) -> float:
        """int int g(x, y) w(x, y) dx dy over the support (g = 1 gives the mass)."""
        if g is None:
            integrand = self.func
        else:
            integrand = lambda x, y: g(x, y) * self.func(x, y)  # noqa: E731
        return adaptive_2d(integrand, self.support, tol=tol)[0]

    @property
    def mass(self) -> float:
        return self.integrate()


def default_weight() -> WeightFunction:
    """Product bump on [1, 2]^2 normalised to total mass 1."""
    c = 1.0 / _bump_mass_1d() ** 2
    return WeightFunction(
        "bump",
        lambda x, y: c * _bump(2 * x - 3) * _bump(2 * y - 3),
        (1.0, 2.0, 1.0, 2.0),
    )


def box_weight(x_lo=1.0, x_hi=2.0, y_lo=1.0, y_hi=2.0) -> WeightFunction:
    """Indicator of a box scaled to mass 1 (not smooth; counting checks only)."""
    c = 1.0 / ((x_hi - x_lo) * (y_hi - y_lo))
    return WeightFunction("box", lambda x, y: np.full(np.broadcast(x, y).shape, c), (x_lo, x_hi, y_lo, y_hi))


@dataclass(frozen=True)
class ScaledFamily:
    params: FamilyParams
    X: float
    A: float
    B: float
    weight: WeightFunction

    @property
    def family(self) -> FamilyId:
        return self.params.family

    def predicted_size(self) -> float:
        """M(F_i) = AB gamma(q^2) / (k zeta(2)), k = 3 for F1 and 12 for F2."""
        g = nt.gamma_l(self.params.q**2)
        zeta2 = math.pi**2 / 6
        return self.A * self.B * float(g) / (self.family.size_divisor * zeta2)


def scale(params: FamilyParams, X: float, weight: WeightFunction | None = None) -> ScaledFamily:
    if X < 100:
        raise DomainError(f"X must be >= 100, got {X}")
    fam = params.family
    weight = weight or default_weight()
    return ScaledFamily(params, float(X), X**fam.a_exponent, X**fam.b_exponent, weight)


# -- curves ----------------------------------------------------------------


@dataclass(frozen=True)
class Curve:
    a: int
    b: int


def check_curve(family, curve: Curve, params: FamilyParams | None = None) -> None:
    family = family_by_name(family)
    a, b = curve.a, curve.b
    if math.gcd(a, b) != 1:
        raise AdmissibilityError(f"{family}: gcd(a, b) = {math.gcd(a, b)} != 1")
    if family is F1:
        if a % 2 == 0 or b % 2 == 0:
            raise AdmissibilityError(f"F1 needs a, b odd, got ({a}, {b})", prime=2)
        if a + 2 * b == 0:
            raise AdmissibilityError("F1 needs a + 2b != 0")
    else:
        if a % 4 != 1 or b % 4 != 1:
            raise AdmissibilityError(f"F2 needs a = b = 1 (mod 4), got ({a}, {b})", prime=2)
        if a * a + b == 0:
            raise AdmissibilityError("F2 needs a^2 + b != 0")
    if params is not None and params.q > 1:
        if (a - params.a0) % params.q or (b - params.b0) % params.q:
            raise AdmissibilityError(f"curve ({a}, {b}) not congruent to ({params.a0}, {params.b0}) mod {params.q}")


def _progression(lo: float, hi: float, r: int, m: int) -> np.ndarray:
    start = math.ceil(lo)
    start += (r - start) % m
    stop = math.floor(hi)
    if start > stop:
        return np.zeros(0, dtype=np.int64)
    return np.arange(start, stop + 1, m, dtype=np.int64)


def family_arrays(scaled: ScaledFamily) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All members as arrays (a, b, weight), ordered by a then b."""
    p = scaled.params
    x_lo, x_hi, y_lo, y_hi = scaled.weight.support
    av = _progression(scaled.A * x_lo, scaled.A * x_hi, p.r, p.modulus)
    bv = _progression(scaled.B * y_lo, scaled.B * y_hi, p.t, p.modulus)
    aa, bb = np.meshgrid(av, bv, indexing="ij")
    aa, bb = aa.ravel(), bb.ravel()
    keep = np.gcd(aa, bb) == 1
    aa, bb = aa[keep], bb[keep]
    w = scaled.weight(aa / scaled.A, bb / scaled.B)
    return aa, bb, w


def enumerate_family(scaled: ScaledFamily) -> Iterator[tuple[Curve, float]]:
    """Stream (curve, weight) pairs; a ascending, then b ascending."""
    p = scaled.params
    x_lo, x_hi, y_lo, y_hi = scaled.weight.support
    av = _progression(scaled.A * x_lo, scaled.A * x_hi, p.r, p.modulus)
    bv = _progression(scaled.B * y_lo, scaled.B * y_hi, p.t, p.modulus)
    for a in av.tolist():
        row = bv[np.gcd(bv, a) == 1]
        w = scaled.weight(np.full(row.shape, a / scaled.A), row / scaled.B)
        for b, wb in zip(row.tolist(), w.tolist()):
            yield Curve(a, b), wb


# -- invariants --------------------------------------------------------------


def conductor(family, curve: Curve) -> int:
    family = family_by_name(family)
    check_curve(family, curve)
    a, b = curve.a, curve.b
    if family is F1:
        return 2**5 * nt.radical(a) * nt.radical(b) * nt.radical(a + 2 * b)
    return 2**6 * nt.radical(b) * nt.radical(a * a + b)


def conductors(family, a: np.ndarray, b: np.ndarray, table: nt.RadicalTable | None = None) -> np.ndarray:
    """Vectorised conductors for admissible arrays (a, b)."""
    family = family_by_name(family)
    if family is F1:
        c = a + 2 * b
        need = int(max(np.abs(a).max(), np.abs(b).max(), np.abs(c).max()))
        table = table if table is not None and table.n_max >= need else nt.RadicalTable(need)
        return 32 * table(a) * table(b) * table(c)
    c = a * a + b
    need = int(max(np.abs(b).max(), np.abs(c).max()))
    table = table if table is not None and table.n_max >= need else nt.RadicalTable(need)
    return 64 * table(b) * table(c)


def reduction_type(family, curve: Curve, p: int) -> str:
    family = family_by_name(family)
    if p == 2:
        raise DomainError("p = 2 is additive for every member; use lambda_p (= 0) instead")
    if p < 2 or not nt.is_prime(p):
        raise DomainError(f"{p} is not an odd prime")
    check_curve(family, curve)
    return "multiplicative" if bad_expression(family, curve.a, curve.b) % p == 0 else "good"


def ap(family, a: int, b: int, p: int) -> int:
    """a_p = -sum_x (f(x)/p) for odd p, any residues a, b."""
    family = family_by_name(family)
    c2, c1 = cubic_coefficients(family, a % p, b % p)
    x = np.arange(p, dtype=np.int64)
    f = (x * ((x * x + c2 * x) % p + c1)) % p
    return -int(nt.legendre_table(p)[f].astype(np.int64).sum())


def lambda_p(family, curve: Curve, p: int) -> float:
    if p < 2 or not nt.is_prime(p):
        raise DomainError(f"{p} is not prime")
    if p == 2:
        return 0.0
    return ap(family, curve.a, curve.b, p) / math.sqrt(p)


def ap_power(a_p: int, p: int, v: int, bad: bool) -> int:
    """A(p^v) = lambda(p^v) p^(v/2) as an exact integer."""
    if v < 0:
        raise DomainError(f"v must be >= 0, got {v}")
    if bad:
        return a_p**v
    prev, cur = 1, a_p
    if v == 0:
        return 1
    for _ in range(v - 1):
        prev, cur = cur, a_p * cur - p * prev
    return cur


def is_bad(family, a: int, b: int, p: int) -> bool:
    return p == 2 or bad_expression(family_by_name(family), a, b) % p == 0


def lambda_prime_power(family, curve: Curve, p: int, v: int) -> float:
    if v < 0:
        raise DomainError(f"v must be >= 0, got {v}")
    if v == 0:
        return 1.0
    if p == 2:
        return 0.0
    family = family_by_name(family)
    a_p = ap(family, curve.a, curve.b, p)
    return ap_power(a_p, p, v, is_bad(family, curve.a, curve.b, p)) / p ** (v / 2)


# -- cross-checks ------------------------------------------------------------


def lemma_bad_ap(family, a: int, b: int, p: int) -> tuple[str, int]:
    """The closed-form a_p of the published bad-prime table, with its case label.

    Kept only to be compared against the character sum.
    """
    family = family_by_name(family)
    if family is F1:
        if a % p == 0:
            return "p|a", nt.jacobi(2 * b, p)
        if b % p == 0:
            return "p|b", nt.jacobi(-a, p)
        if (a + 2 * b) % p == 0:
            return "p|a+2b", nt.jacobi(2 * b, p)
    else:
        if b % p == 0:
            return "p|b", nt.jacobi(2 * a, p)
        if (a * a + b) % p == 0:
            return "p|a^2+b", nt.jacobi(-a, p)
    raise DomainError(f"{p} is a prime of good reduction for ({a}, {b})")


def nonsingular_point_count(family, a: int, b: int, p: int) -> int:
    """#E_ns(F_p) by brute force, including the point at infinity."""
    family = family_by_name(family)
    c2, c1 = cubic_coefficients(family, a, b)
    count = 1
    for x in range(p):
        fx = (x**3 + c2 * x * x + c1 * x) % p
        dfx = (3 * x * x + 2 * c2 * x + c1) % p
        for y in range(p):
            if (y * y - fx) % p:
                continue
            if y % p == 0 and fx == 0 and dfx == 0:
                continue
            count += 1
    return count


@dataclass(frozen=True)
class BadPrimeCheck:
    a: int
    b: int
    p: int
    case: str
    character_sum: int
    lemma_table: int
    point_count: int | None

    @property
    def agrees(self) -> bool:
        return self.character_sum == self.lemma_table


def bad_prime_crosscheck(family, curve: Curve, primes, with_point_count: bool = True) -> list[BadPrimeCheck]:
    """Compare a_p from the character sum with the closed table at each odd bad prime."""
    family = family_by_name(family)
    rows = []
    for p in primes:
        if p == 2 or bad_expression(family, curve.a, curve.b) % p:
            continue
        case, lem = lemma_bad_ap(family, curve.a, curve.b, p)
        a_p = ap(family, curve.a, curve.b, p)
        pc = p - nonsingular_point_count(family, curve.a, curve.b, p) if with_point_count else None
        rows.append(BadPrimeCheck(curve.a, curve.b, p, case, a_p, lem, pc))
    return rows

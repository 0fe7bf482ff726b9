"""Explicit-formula evaluation of the 1-level density and the biased-family builder.

For a curve E and test pair (phi, phihat) the zero sum D(E; phi) equals five
computable terms: conductor, gamma factor, bad primes, the p-not-dividing-N
prime-number-theorem piece, and the good-prime Hecke sum.  Because phihat
vanishes outside [-rho, rho] every prime sum stops at p^v <= X^rho.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate, special

from . import charsums as cs
from . import numtheory as nt
from .constants import TruncationParams, c2_constant, predicted_density
from .errors import DomainError
from .families import (
    F1,
    Curve,
    ScaledFamily,
    ap,
    ap_power,
    check_curve,
    conductor,
    conductors,
    family_arrays,
    family_by_name,
    is_bad,
    validate_and_residues,
)

# -- complex digamma ---------------------------------------------------------

_STIRLING = (1 / 12, -1 / 120, 1 / 252, -1 / 240, 1 / 132, -691 / 32760)
_SHIFT_RADIUS = 10.0


def digamma(z):
    """psi(z) for complex z with Re z > 0 (vectorised).

    Shift by the recurrence psi(z) = psi(z + 1) - 1/z until |z| >= 10, then
    psi(w) ~ log w - 1/(2w) - sum B_2k / (2k w^2k) with six Bernoulli terms.
    """
    z = np.asarray(z, dtype=np.complex128)
    if np.any(z.real <= 0):
        raise DomainError("digamma is only implemented for Re z > 0")
    shift = np.maximum(0, np.ceil(_SHIFT_RADIUS - np.abs(z))).astype(np.int64)
    n = int(shift.max()) if shift.size else 0
    acc = np.zeros_like(z)
    w = z.copy()
    for _ in range(n):
        active = shift > 0
        acc = np.where(active, acc - 1 / w, acc)
        w = np.where(active, w + 1, w)
        shift = shift - active
    inv2 = 1 / (w * w)
    series = np.zeros_like(z)
    for c in reversed(_STIRLING):
        series = (series + c) * inv2
    return np.log(w) - 0.5 / w - series + acc


# -- test functions ----------------------------------------------------------


@dataclass(frozen=True)
class TestFunctionPair:
    kind: str
    rho: float
    phi: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    phi_hat: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    phi0: float = 0.0
    phihat0: float = 1.0

    __test__ = False  # not a pytest class

    def describe(self) -> dict:
        return {"kind": self.kind, "rho": self.rho, "phi0": self.phi0, "phihat0": self.phihat0}

    def phi_hat_even_derivative(self, l: int) -> float:
        """phihat^(2l)(0) for the cosine-squared pair."""
        if self.kind != "cosine_sq":
            raise DomainError(f"{self.kind} phihat is not twice differentiable at 0")
        if l == 0:
            return 1.0
        return 0.5 * (-1) ** l * (math.pi / self.rho) ** (2 * l)


def _fejer(rho: float) -> TestFunctionPair:
    def phi(x):
        return rho * np.sinc(rho * np.asarray(x, dtype=np.float64)) ** 2

    def phi_hat(t):
        return np.maximum(0.0, 1.0 - np.abs(np.asarray(t, dtype=np.float64)) / rho)

    return TestFunctionPair("fejer", rho, phi, phi_hat, rho, 1.0)


def _cosine_sq(rho: float) -> TestFunctionPair:
    def phi(x):
        u = 2 * rho * np.asarray(x, dtype=np.float64)
        den = 1.0 - u * u
        near = np.abs(den) < 1e-9
        out = rho * np.sinc(u) / np.where(near, 1.0, den)
        return np.where(near, 0.5 * rho, out)

    def phi_hat(t):
        t = np.asarray(t, dtype=np.float64)
        return np.where(np.abs(t) < rho, np.cos(np.pi * t / (2 * rho)) ** 2, 0.0)

    return TestFunctionPair("cosine_sq", rho, phi, phi_hat, rho, 1.0)


KINDS = {"fejer": _fejer, "cosine_sq": _cosine_sq}


def make_test_function(kind: str, rho: float, family=None) -> TestFunctionPair:
    """Fejer or cosine-squared pair with phihat supported in [-rho, rho]."""
    if kind not in KINDS:
        raise DomainError(f"unknown test-function kind {kind!r}")
    bound = family_by_name(family).support_bound if family is not None else F1.support_bound
    if not 0 < rho < bound:
        raise DomainError(f"rho = {rho} outside (0, {bound:.6g})")
    return KINDS[kind](float(rho))


# -- gamma-factor term -------------------------------------------------------


def _gamma_integrand(L: float) -> Callable[[float], float]:
    c = -math.log(2 * math.pi)
    return lambda x: c + float(digamma(1 + 2j * math.pi * x / L).real)


@lru_cache(maxsize=256)
def _gamma_term_cached(kind: str, rho: float, X: float, limit: int) -> float:
    test = KINDS[kind](rho)
    L = math.log(X)
    g = _gamma_integrand(L)
    # the integrand is even; integrate [0, R] directly, oscillatory tail on [R, inf)
    R = 4.0 / rho
    breaks = np.linspace(0, R, 17)
    head = math.fsum(
        integrate.quad(lambda x: float(test.phi(x)) * g(x), lo, hi, epsabs=1e-14, epsrel=1e-12, limit=limit)[0]
        for lo, hi in zip(breaks[:-1], breaks[1:])
    )
    w = 2 * math.pi * rho
    if kind == "fejer":
        # phi = (1 - cos(2 pi rho x)) / (2 rho pi^2 x^2)
        base = lambda x: g(x) / (2 * rho * math.pi**2 * x * x)  # noqa: E731
        smooth = integrate.quad(base, R, np.inf, epsabs=1e-14, epsrel=1e-12, limit=limit)[0]
        osc = integrate.quad(base, R, np.inf, weight="cos", wvar=w, limlst=200)[0]
        tail = smooth - osc
    else:
        # phi = sin(2 pi rho x) / (2 pi x (1 - 4 rho^2 x^2))
        base = lambda x: g(x) / (2 * math.pi * x * (1 - 4 * rho * rho * x * x))  # noqa: E731
        tail = integrate.quad(base, R, np.inf, weight="sin", wvar=w, limlst=200)[0]
    return 2.0 / L * 2.0 * (head + tail)


def gamma_term(X: float, test: TestFunctionPair, limit: int = 200) -> float:
    """(2/log X) int phi(x) {-log 2pi + Re psi(1 + 2 pi i x / log X)} dx."""
    return _gamma_term_cached(test.kind, test.rho, float(X), limit)


def gamma_term_series_check(X: float, test: TestFunctionPair, M: int) -> float:
    """c_2 phihat(0)/log X - 2 sum_{l<=M} zeta(1+2l) phihat^(2l)(0) (log X)^(-2l-1)."""
    if test.kind != "cosine_sq":
        raise DomainError("series check needs the cosine_sq pair (phihat smooth at 0)")
    if not 0 <= M <= 3:
        raise DomainError(f"M must lie in [0, 3], got {M}")
    L = math.log(X)
    out = c2_constant() * test.phihat0 / L
    for l in range(1, M + 1):
        out -= 2 * float(special.zeta(1 + 2 * l)) * test.phi_hat_even_derivative(l) * L ** (-2 * l - 1)
    return out


# -- per-prime contribution tables -----------------------------------------


@dataclass(frozen=True)
class DensityValue:
    total: float
    term_conductor: float
    term_gamma: float
    term_bad: float
    term_pnt: float
    term_good: float


def _prime_contributions(p: int, a_p: int, bad: bool, L: float, test: TestFunctionPair) -> tuple[float, float, float]:
    """(bad, pnt, good) contributions of one prime with the given a_p."""
    lp = math.log(p)
    rho = test.rho
    if bad:
        s = []
        nu = 1
        while nu * lp / L < rho:
            s.append((a_p / p) ** nu * float(test.phi_hat(nu * lp / L)))
            nu += 1
        return -2 * lp / L * math.fsum(s), 0.0, 0.0
    pnt = 2 * lp / (p * L) * float(test.phi_hat(2 * lp / L))
    s = []
    nu = 1
    while nu * lp / L < rho:
        coeff = ap_power(a_p, p, nu, False) / p**nu
        s.append(coeff * (float(test.phi_hat(nu * lp / L)) - float(test.phi_hat((nu + 2) * lp / L)) / p))
        nu += 1
    return 0.0, pnt, -2 * lp / L * math.fsum(s)


def _active_primes(X: float, rho: float) -> list[int]:
    """Primes whose terms can be nonzero: log p / log X < rho."""
    cut = X**rho
    return [p for p in nt.odd_primes_upto(int(math.ceil(cut)) + 1) if math.log(p) < rho * math.log(X)]


def explicit_formula_value(family, curve: Curve, X: float, test: TestFunctionPair) -> DensityValue:
    """D(E; phi) through the explicit formula, by direct character sums."""
    family = family_by_name(family)
    check_curve(family, curve)
    if X < 100:
        raise DomainError(f"X must be >= 100, got {X}")
    L = math.log(X)
    N = conductor(family, curve)
    t_cond = test.phihat0 * math.log(N) / L
    t_gamma = gamma_term(X, test)
    bad_terms, pnt_terms, good_terms = [], [], []
    for p in _active_primes(X, test.rho):
        a_p = ap(family, curve.a, curve.b, p)
        tb, tp, tg = _prime_contributions(p, a_p, is_bad(family, curve.a, curve.b, p), L, test)
        bad_terms.append(tb)
        pnt_terms.append(tp)
        good_terms.append(tg)
    # p = 2 divides N and has lambda = 0: no contribution to any prime term
    t_bad, t_pnt, t_good = math.fsum(bad_terms), math.fsum(pnt_terms), math.fsum(good_terms)
    total = math.fsum([t_cond, t_gamma, t_bad, t_pnt, t_good])
    return DensityValue(total, t_cond, t_gamma, t_bad, t_pnt, t_good)


@dataclass(frozen=True)
class _ResidueTables:
    primes: tuple[int, ...]
    bad: tuple[np.ndarray, ...]
    pnt: tuple[np.ndarray, ...]
    good: tuple[np.ndarray, ...]


def _residue_tables(family, X: float, test: TestFunctionPair) -> _ResidueTables:
    L = math.log(X)
    primes = _active_primes(X, test.rho)
    bad_t, pnt_t, good_t = [], [], []
    for p in primes:
        table = cs.ap_table(family, p)
        vals = {}
        for a_p, flag, _ in cs.ap_histogram(family, p):
            vals[(a_p, flag)] = _prime_contributions(p, a_p, flag, L, test)
        keys = np.unique(table.ap)
        out = [np.zeros((p, p)) for _ in range(3)]
        for k in keys.tolist():
            for flag in (False, True):
                sel = (table.ap == k) & (table.bad == flag)
                if sel.any():
                    for j in range(3):
                        out[j][sel] = vals[(k, flag)][j]
        bad_t.append(out[0])
        pnt_t.append(out[1])
        good_t.append(out[2])
    return _ResidueTables(tuple(primes), tuple(bad_t), tuple(pnt_t), tuple(good_t))


TERM_NAMES = ("term_conductor", "term_gamma", "term_bad", "term_pnt", "term_good")


def table_terms(family, a: np.ndarray, b: np.ndarray, X: float, test: TestFunctionPair) -> dict[str, np.ndarray]:
    """Per-curve explicit-formula terms via residue tables keyed on (a mod p, b mod p)."""
    family = family_by_name(family)
    L = math.log(X)
    tabs = _residue_tables(family, X, test)
    tb = np.zeros(len(a))
    tp = np.zeros(len(a))
    tg = np.zeros(len(a))
    for p, B_, P_, G_ in zip(tabs.primes, tabs.bad, tabs.pnt, tabs.good):
        ia, ib = a % p, b % p
        tb += B_[ia, ib]
        tp += P_[ia, ib]
        tg += G_[ia, ib]
    return {
        "term_conductor": test.phihat0 * np.log(conductors(family, a, b).astype(np.float64)) / L,
        "term_gamma": np.full(len(a), gamma_term(X, test)),
        "term_bad": tb,
        "term_pnt": tp,
        "term_good": tg,
    }


@dataclass(frozen=True)
class FamilyDensity:
    empirical: float
    W_X: float
    n_curves: int
    mean_terms: dict[str, float]


def _weighted_mean(values: np.ndarray, w: np.ndarray, W: float, block: int = 1 << 16) -> float:
    # fixed blocks, each summed with fsum, combined in order
    parts = [math.fsum((values[i : i + block] * w[i : i + block]).tolist()) for i in range(0, len(w), block)]
    return math.fsum(parts) / W


def family_density(scaled: ScaledFamily, test: TestFunctionPair, direct: bool = False) -> FamilyDensity:
    """Weighted average of D(E; phi) over the scaled family."""
    fam = scaled.family
    if not 0 < test.rho < fam.support_bound:
        raise DomainError(f"support {test.rho} outside (0, {fam.support_bound:.4f}) for {fam}")
    a, b, w = family_arrays(scaled)
    keep = w > 0
    a, b, w = a[keep], b[keep], w[keep]
    if len(a) == 0:
        raise DomainError("empty family at this scale")
    W = math.fsum(w.tolist())
    if direct:
        vals = [explicit_formula_value(fam, Curve(int(x), int(y)), scaled.X, test) for x, y in zip(a, b)]
        cols = {k: np.array([getattr(v, k) for v in vals]) for k in TERM_NAMES}
    else:
        cols = table_terms(fam, a, b, scaled.X, test)
    means = {k: _weighted_mean(v, w, W) for k, v in cols.items()}
    return FamilyDensity(math.fsum(means.values()), W, len(a), means)


# -- reports -----------------------------------------------------------------


@dataclass(frozen=True)
class DensityReport:
    scaled: dict
    test: dict
    empirical: float
    predicted: float
    residual: float
    residual_scaled: float
    W_X: float
    mean_terms: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "DensityReport":
        return cls(**d)


def describe_scaled(scaled: ScaledFamily) -> dict:
    p = scaled.params
    return {
        "family": p.family.name, "q": p.q, "a0": p.a0, "b0": p.b0, "X": scaled.X,
        "A": scaled.A, "B": scaled.B, "weight": scaled.weight.name,
    }


def compare_report(scaled: ScaledFamily, test: TestFunctionPair, trunc: TruncationParams | None = None) -> DensityReport:
    fd = family_density(scaled, test)
    pred = predicted_density(scaled, test, trunc)
    res = fd.empirical - pred
    return DensityReport(
        describe_scaled(scaled), test.describe(), fd.empirical, pred, res,
        res * math.log(scaled.X) ** 2, fd.W_X, fd.mean_terms,
    )


# -- biased families -----------------------------------------------------------


@dataclass(frozen=True)
class BiasSpec:
    n: int
    q_n: int
    a0n: int
    b0n: int
    per_prime: tuple[tuple[int, int, int, float], ...]
    e_value: float
    sign: str
    family: str = "F1"

    @property
    def sqrt_log_q(self) -> float:
        return math.sqrt(math.log(self.q_n))

    def as_dict(self) -> dict:
        return {
            "family": self.family, "n": self.n, "sign": self.sign, "q_n": str(self.q_n),
            "a0n": str(self.a0n), "b0n": str(self.b0n),
            "per_prime": [{"p": p, "a": a, "b": b, "lambda": lam} for p, a, b, lam in self.per_prime],
            "e_value": self.e_value, "sqrt_log_q": self.sqrt_log_q,
            "e_over_sqrt_log_q": self.e_value / self.sqrt_log_q,
        }


def _normalise_sign(sign: str) -> int:
    if sign in ("+", "plus", "pos"):
        return 1
    if sign in ("-", "minus", "neg"):
        return -1
    raise DomainError(f"sign must be + or -, got {sign!r}")


def bias_builder(family, n: int, sign: str) -> BiasSpec:
    """Congruence family extremising lambda(p) at every odd p <= n.

    sign = + picks the most negative lambda(p) (raising e), sign = - the most positive.
    """
    from .constants import e_constant

    family = family_by_name(family)
    s = _normalise_sign(sign)
    if n < 3:
        raise DomainError("n < 3 gives an empty product of odd primes")
    if n > 97:
        raise DomainError("n must be <= 97 so that q_n fits in 128 bits")
    choices = []
    q, a0, b0 = 1, 0, 0
    for p in nt.odd_primes_upto(n):
        table = cs.ap_table(family, p)
        score = np.where(table.bad, -np.inf, -s * table.ap.astype(np.float64))
        # argmax returns the first index in row-major order: lexicographic tie-break
        idx = int(np.argmax(score))
        a_p, b_p = divmod(idx, p)
        choices.append((p, a_p, b_p, int(table.ap[a_p, b_p]) / math.sqrt(p)))
        a0, _ = nt.crt_pair(a0, q, a_p, p)
        b0, q = nt.crt_pair(b0, q, b_p, p)
    validate_and_residues(family, q, a0, b0)
    e = e_constant(family, q, a0, b0)
    return BiasSpec(n, q, a0, b0, tuple(choices), e, "+" if s > 0 else "-", family.name)


__all__ = [
    "BiasSpec", "DensityReport", "DensityValue", "FamilyDensity", "TestFunctionPair",
    "bias_builder", "compare_report", "digamma", "explicit_formula_value",
    "family_density", "gamma_term", "gamma_term_series_check", "make_test_function",
]

"""Primes, quadratic symbols, radicals and the Chebyshev-theta quantities."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from .errors import DomainError

SEGMENT_THRESHOLD = 10**8
BLOCK_SIZE = 1 << 20

# Heuristic constant in the RH-sized tail T^(-1/2) (log T)^2; reported, never enforced.
TAIL_K = 1.0


def _small_sieve(limit: int) -> np.ndarray:
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


def _sieve_block(lo: int, hi: int, base: np.ndarray) -> np.ndarray:
    """Primes in [lo, hi) using base primes up to sqrt(hi)."""
    mask = np.ones(hi - lo, dtype=bool)
    for p in base:
        p = int(p)
        if p * p >= hi:
            break
        start = max(p * p, -(-lo // p) * p)
        mask[start - lo :: p] = False
    if lo < 2:
        mask[: 2 - lo] = False
    return lo + np.flatnonzero(mask).astype(np.int64)


def prime_blocks(limit: int, block: int = BLOCK_SIZE, threads: int = 1) -> Iterator[np.ndarray]:
    """Yield the primes <= limit as consecutive ascending blocks.

    Blocks are produced in a fixed order whatever ``threads`` is, so any
    reduction done block-by-block is schedule independent.
    """
    if limit < 2:
        raise DomainError(f"sieve limit must be >= 2, got {limit}")
    base = _small_sieve(math.isqrt(limit) + 1)
    bounds = [(lo, min(lo + block, limit + 1)) for lo in range(0, limit + 1, block)]
    if threads <= 1:
        for lo, hi in bounds:
            yield _sieve_block(lo, hi, base)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        # bounded look-ahead keeps memory flat for T ~ 1e9
        window = 4 * threads
        pending = [pool.submit(_sieve_block, lo, hi, base) for lo, hi in bounds[:window]]
        nxt = window
        while pending:
            fut = pending.pop(0)
            if nxt < len(bounds):
                lo, hi = bounds[nxt]
                pending.append(pool.submit(_sieve_block, lo, hi, base))
                nxt += 1
            yield fut.result()


@dataclass(frozen=True)
class PrimeSieve:
    limit: int
    primes: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.primes)

    def __iter__(self):
        return iter(self.primes.tolist())


def sieve(limit: int, threads: int = 1) -> PrimeSieve:
    """All primes up to ``limit``; segmented above 10**8."""
    if limit < 2:
        raise DomainError(f"sieve limit must be >= 2, got {limit}")
    if limit <= SEGMENT_THRESHOLD:
        primes = _small_sieve(limit)
    else:
        primes = np.concatenate(list(prime_blocks(limit, threads=threads)))
    primes.setflags(write=False)
    return PrimeSieve(limit, primes)


def odd_primes_upto(limit: int) -> list[int]:
    if limit < 3:
        return []
    return [int(p) for p in _small_sieve(limit)[1:]]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41):
        if n % p == 0:
            return n == p
    # deterministic Miller-Rabin for n < 3.3e24
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def jacobi(n: int, m: int) -> int:
    """Jacobi symbol (n/m) for odd positive m, binary algorithm."""
    if m <= 0 or m % 2 == 0:
        raise DomainError(f"Jacobi symbol needs odd positive modulus, got {m}")
    n %= m
    result = 1
    while n:
        while n % 2 == 0:
            n //= 2
            if m % 8 in (3, 5):
                result = -result
        n, m = m, n
        if n % 4 == 3 and m % 4 == 3:
            result = -result
        n %= m
    return result if m == 1 else 0


def legendre_table(p: int) -> np.ndarray:
    """chi[r] = (r/p) for r in [0, p), as int8."""
    chi = -np.ones(p, dtype=np.int8)
    chi[0] = 0
    squares = (np.arange(1, (p + 1) // 2, dtype=np.int64) ** 2) % p
    chi[squares] = 1
    return chi


def prime_factors(n: int) -> list[int]:
    """Distinct prime divisors of |n| by trial division (small inputs only)."""
    n = abs(n)
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return out


def radical(n: int) -> int:
    if n == 0:
        raise DomainError("radical(0) is undefined")
    return math.prod(prime_factors(n))


class RadicalTable:
    """Vectorised radicals of all integers up to ``n_max``."""

    def __init__(self, n_max: int):
        n_max = max(int(n_max), 2)
        rad = np.ones(n_max + 1, dtype=np.int64)
        for p in _small_sieve(n_max):
            rad[p::p] *= p
        self.n_max = n_max
        self.rad = rad

    def __call__(self, values: np.ndarray) -> np.ndarray:
        values = np.abs(np.asarray(values, dtype=np.int64))
        if values.size and (values.max() > self.n_max or values.min() == 0):
            raise DomainError("radical table out of range or zero argument")
        return self.rad[values]


def gamma_l(l: int) -> Fraction:
    """(1/l) * prod_{p | l} 1/(1 - p^-2), exactly."""
    if l <= 0:
        raise DomainError(f"gamma_l needs a positive integer, got {l}")
    out = Fraction(1, l)
    for p in prime_factors(l):
        out *= Fraction(p * p, p * p - 1)
    return out


def crt_pair(r1: int, m1: int, r2: int, m2: int) -> tuple[int, int]:
    """Combine x = r1 (m1), x = r2 (m2) for coprime moduli."""
    if math.gcd(m1, m2) != 1:
        raise DomainError(f"CRT moduli {m1}, {m2} are not coprime")
    t = (r2 - r1) * pow(m1, -1, m2) % m2
    return (r1 + m1 * t) % (m1 * m2), m1 * m2


@dataclass(frozen=True)
class ThetaIntegralResult:
    T: int
    theta_T: float
    r_integral: float
    tail_estimate: float
    mertens_sum: float  # sum_{p <= T} log p / p


def theta_and_r_integral(T: int, threads: int = 1) -> ThetaIntegralResult:
    """theta(T) and int_1^T (theta(t) - t)/t^2 dt.

    Uses the summation-by-parts identity
    int_1^T R(t)/t^2 dt = sum_{p<=T} log p / p - theta(T)/T - log T.
    """
    if T < 2:
        raise DomainError(f"T must be >= 2, got {T}")
    theta_parts = []
    mertens_parts = []
    for block in prime_blocks(T, threads=threads):
        if block.size == 0:
            continue
        logs = np.log(block.astype(np.float64))
        theta_parts.append(math.fsum(logs))
        mertens_parts.append(math.fsum(logs / block))
    theta = math.fsum(theta_parts)
    mertens = math.fsum(mertens_parts)
    r_int = mertens - theta / T - math.log(T)
    tail = TAIL_K * T**-0.5 * math.log(T) ** 2
    return ThetaIntegralResult(T, theta, r_int, tail, mertens)

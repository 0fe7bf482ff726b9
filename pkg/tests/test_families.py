import math
import random

import numpy as np
import pytest
import sympy

from ecdensity import families as fm
from ecdensity import numtheory as nt
from ecdensity.errors import AdmissibilityError, DomainError
from ecdensity.families import F1, F2, Curve


def naive_ap(family, a, b, p):
    c2, c1 = fm.cubic_coefficients(family, a, b)
    return -sum(int(sympy.legendre_symbol((x**3 + c2 * x * x + c1 * x) % p, p)) if (x**3 + c2 * x * x + c1 * x) % p else 0 for x in range(p))


def random_curves(family, n, seed, bound=10**5):
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        a, b = rng.randint(1, bound), rng.randint(1, bound)
        if family is F1:
            a, b = a | 1, b | 1
        else:
            a, b = 4 * (a // 4) + 1, 4 * (b // 4) + 1
        if math.gcd(a, b) == 1:
            out.append(Curve(a, b))
    return out


class TestParams:
    def test_q1(self):
        p = fm.validate_and_residues(F1, 1, 1, 1)
        assert (p.r % 2, p.t % 2, p.modulus) == (1, 1, 2)

    def test_crt(self):
        p = fm.validate_and_residues(F1, 3, 1, 2)
        assert p.r % 6 == 1 and p.t % 3 == 2 and p.t % 2 == 1

    def test_f2_residues(self):
        p = fm.validate_and_residues(F2, 5, 2, 3)
        assert p.modulus == 20 and p.r % 4 == 1 and p.r % 5 == 2 and p.t % 4 == 1 and p.t % 5 == 3

    def test_admissibility_names_prime(self):
        with pytest.raises(AdmissibilityError) as exc:
            fm.validate_and_residues(F1, 3, 1, 1)
        assert exc.value.prime == 3 and "3" in str(exc.value)

    def test_even_q(self):
        with pytest.raises(DomainError):
            fm.validate_and_residues(F1, 4, 1, 1)


class TestWeights:
    def test_default_mass(self):
        assert fm.default_weight().mass == pytest.approx(1.0, abs=1e-8)

    def test_vanishes_outside(self):
        w = fm.default_weight()
        assert w(0.5, 1.5) == 0 and w(1.5, 2.5) == 0 and w(1.5, 1.5) > 0


class TestEnumerate:
    def test_small_box(self, f1_prime):
        scaled = fm.scale(f1_prime, 1000.0, fm.box_weight())
        assert scaled.A == pytest.approx(10) and scaled.B == pytest.approx(10)
        got = [(c.a, c.b) for c, _ in fm.enumerate_family(scaled)]
        lo, hi = math.ceil(scaled.A), math.floor(2 * scaled.A)
        want = [(a, b) for a in range(lo, hi + 1) for b in range(lo, hi + 1) if a % 2 and b % 2 and math.gcd(a, b) == 1]
        assert got == want

    @pytest.mark.parametrize("family,q,a0,b0,X", [(F1, 1, 1, 1, 8e6), (F1, 3, 1, 2, 8e6), (F2, 1, 1, 1, 1.6e9), (F2, 5, 2, 3, 1.6e9)])
    def test_against_double_loop(self, family, q, a0, b0, X):
        params = fm.validate_and_residues(family, q, a0, b0)
        scaled = fm.scale(params, X, fm.box_weight())
        assert scaled.A <= 200 and scaled.B <= 40000
        got = [(c.a, c.b) for c, _ in fm.enumerate_family(scaled)]
        a_lo, a_hi = math.ceil(scaled.A), math.floor(2 * scaled.A)
        b_lo, b_hi = math.ceil(scaled.B), math.floor(2 * scaled.B)
        want = []
        for a in range(a_lo, a_hi + 1):
            for b in range(b_lo, b_hi + 1):
                try:
                    fm.check_curve(family, Curve(a, b), params)
                except AdmissibilityError:
                    continue
                want.append((a, b))
        assert got == want
        assert len(set(got)) == len(got)
        a, b, _ = fm.family_arrays(scaled)
        assert list(zip(a.tolist(), b.tolist())) == want

    def test_f2_residues_mod_4(self, f2_prime):
        scaled = fm.scale(f2_prime, 1e7)
        assert all(c.a % 4 == 1 and c.b % 4 == 1 for c, _ in fm.enumerate_family(scaled))

    def test_box_count_near_prediction(self, f1_prime):
        scaled = fm.scale(f1_prime, 1e6, fm.box_weight())
        n = sum(1 for _ in fm.enumerate_family(scaled))
        assert scaled.predicted_size() == pytest.approx(1e4 / (3 * math.pi**2 / 6), rel=1e-9)
        assert n == pytest.approx(scaled.predicted_size(), rel=0.05)

    def test_small_X(self, f1_prime):
        with pytest.raises(DomainError):
            fm.scale(f1_prime, 50)


class TestConductor:
    def test_examples(self):
        assert fm.conductor(F1, Curve(1, 1)) == 96
        assert fm.conductor(F1, Curve(3, 5)) == 6240
        assert fm.conductor(F2, Curve(1, 5)) == 1920

    def test_inadmissible(self):
        with pytest.raises(DomainError):
            fm.conductor(F1, Curve(2, 1))
        with pytest.raises(DomainError):
            fm.conductor(F2, Curve(3, 1))

    def test_large_values_exact(self):
        a, b = 10**12 + 39, 10**12 + 1
        n = fm.conductor(F1, Curve(a, b))
        assert n == 32 * math.prod(sympy.primefactors(a)) * math.prod(sympy.primefactors(b)) * math.prod(sympy.primefactors(a + 2 * b))

    @pytest.mark.parametrize("family", [F1, F2])
    def test_vectorised(self, family):
        curves = random_curves(family, 200, 7, bound=3000)
        a = np.array([c.a for c in curves])
        b = np.array([c.b for c in curves])
        assert fm.conductors(family, a, b).tolist() == [fm.conductor(family, c) for c in curves]


class TestReduction:
    def test_examples(self):
        assert fm.reduction_type(F1, Curve(1, 1), 3) == "multiplicative"
        assert fm.reduction_type(F1, Curve(1, 1), 5) == "good"
        assert fm.reduction_type(F2, Curve(1, 1), 3) == "good"

    def test_p2(self):
        with pytest.raises(DomainError):
            fm.reduction_type(F1, Curve(1, 1), 2)

    @pytest.mark.parametrize("family", [F1, F2])
    def test_locality(self, family):
        # p | N depends only on (a mod p, b mod p)
        curves = random_curves(family, 150, 11)
        for p in nt.odd_primes_upto(31):
            seen = {}
            for c in curves:
                key = (c.a % p, c.b % p)
                flag = fm.conductor(family, c) % p == 0
                assert seen.setdefault(key, flag) == flag


class TestLambda:
    def test_examples(self):
        assert fm.lambda_p(F1, Curve(1, 1), 2) == 0
        assert fm.lambda_p(F1, Curve(1, 1), 5) == pytest.approx(2 / math.sqrt(5), abs=1e-15)
        assert fm.lambda_p(F1, Curve(1, 3), 5) == pytest.approx(-2 / math.sqrt(5), abs=1e-15)

    def test_prime_powers(self):
        assert fm.lambda_prime_power(F1, Curve(7, 9), 11, 0) == 1
        assert fm.lambda_prime_power(F1, Curve(1, 3), 5, 2) == pytest.approx(-1 / 5, abs=1e-15)
        assert fm.lambda_prime_power(F1, Curve(1, 1), 3, 2) == pytest.approx(1 / 3, abs=1e-15)
        with pytest.raises(DomainError):
            fm.lambda_prime_power(F1, Curve(1, 1), 3, -1)

    def test_recurrence_matches_float_recurrence(self):
        c = Curve(1, 3)
        lam = fm.lambda_p(F1, c, 5)
        prev, cur = 1.0, lam
        for v in range(2, 10):
            prev, cur = cur, lam * cur - prev
            assert fm.lambda_prime_power(F1, c, 5, v) == pytest.approx(cur, abs=1e-12)

    @pytest.mark.parametrize("family", [F1, F2])
    def test_character_sum_matches_sympy(self, family):
        for c in random_curves(family, 20, 3):
            for p in (3, 5, 7, 11, 13):
                assert fm.ap(family, c.a, c.b, p) == naive_ap(family, c.a, c.b, p)

    @pytest.mark.parametrize("family", [F1, F2])
    def test_hasse_and_integrality(self, family):
        for c in random_curves(family, 200, 5):
            for p in nt.odd_primes_upto(97):
                if fm.is_bad(family, c.a, c.b, p):
                    continue
                val = fm.lambda_p(family, c, p) * math.sqrt(p)
                assert abs(val - round(val)) < 1e-9 and abs(val) <= 2 * math.sqrt(p)

    @pytest.mark.parametrize("family", [F1, F2])
    def test_scaling_covariance(self, family):
        for p in (3, 5, 7, 11, 13):
            for a in range(p):
                for b in range(p):
                    base = fm.ap(family, a, b, p)
                    for e in range(1, p):
                        eb = e * b if family is F1 else e * e * b
                        assert fm.ap(family, e * a, eb, p) == nt.jacobi(e, p) * base


class TestBadPrimes:
    @pytest.mark.parametrize("family", [F1, F2])
    def test_multiplicative_point_count(self, family):
        primes = nt.odd_primes_upto(31)
        for c in random_curves(family, 40, 13, bound=3000):
            for row in fm.bad_prime_crosscheck(family, c, primes):
                assert row.character_sum in (-1, 1)
                assert row.character_sum == row.point_count

    def test_sign_discrepancy_flagged(self):
        (row,) = fm.bad_prime_crosscheck(F1, Curve(1, 1), [3])
        assert row.case == "p|a+2b"
        assert row.character_sum == 1 and row.lemma_table == -1 and not row.agrees
        assert row.point_count == 1

    def test_discrepancy_only_for_3_mod_4(self):
        for c in random_curves(F1, 60, 17, bound=2000):
            for row in fm.bad_prime_crosscheck(F1, c, nt.odd_primes_upto(31), with_point_count=False):
                if row.case == "p|a+2b":
                    assert row.agrees == (row.p % 4 == 1)
                else:
                    assert row.agrees

    def test_f2_table_agrees(self):
        for c in random_curves(F2, 60, 19, bound=2000):
            assert all(r.agrees for r in fm.bad_prime_crosscheck(F2, c, nt.odd_primes_upto(31), with_point_count=False))

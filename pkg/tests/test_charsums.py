import time
from fractions import Fraction

import numpy as np
import pytest
import sympy

from ecdensity import charsums as cs
from ecdensity import families as fm
from ecdensity import numtheory as nt
from ecdensity.errors import DomainError, ResourceError
from ecdensity.families import F1, F2


def brute_table(family, p):
    """Direct Legendre-symbol sums for every residue pair."""
    out = {}
    for a in range(p):
        for b in range(p):
            c2, c1 = fm.cubic_coefficients(family, a, b)
            s = 0
            for x in range(p):
                v = (x**3 + c2 * x * x + c1 * x) % p
                s += 0 if v == 0 else int(sympy.legendre_symbol(v, p))
            out[(a, b)] = -s
    return out


def brute_ap_power(a, p, v, bad):
    """A(p^v) from the complex Frobenius roots of x^2 - a x + p."""
    if bad:
        return a**v
    disc = complex(a * a - 4 * p) ** 0.5
    al, be = (a + disc) / 2, (a - disc) / 2
    return round(((al ** (v + 1) - be ** (v + 1)) / (al - be)).real)


class TestTable:
    def test_f1_p3_examples(self):
        t = cs.ap_table(F1, 3)
        assert t.ap.shape == (3, 3)
        assert t[1, 2] == (0, False)
        assert t[0, 1] == (-1, True)

    def test_f2_p3_hasse(self):
        t = cs.ap_table(F2, 3)
        assert np.abs(t.ap).max() <= 3

    @pytest.mark.parametrize("family", [F1, F2])
    @pytest.mark.parametrize("p", [3, 5, 7, 11, 13])
    def test_orbit_table_vs_naive(self, family, p):
        t = cs.ap_table(family, p)
        naive = brute_table(family, p)
        for (a, b), v in naive.items():
            assert t[a, b][0] == v
            assert t[a, b][1] == fm.is_bad(family, a, b, p)

    @pytest.mark.parametrize("family", [F1, F2])
    def test_entry_bounds(self, family):
        for p in nt.odd_primes_upto(97):
            t = cs.ap_table(family, p)
            good = ~t.bad
            assert np.all(np.abs(t.ap[good]).astype(float) <= 2 * np.sqrt(p))
            assert np.all(np.isin(t.ap[t.bad], [-1, 0, 1]))

    def test_histogram_total(self):
        assert sum(n for _, _, n in cs.ap_histogram(F2, 101)) == 101**2

    def test_errors(self):
        with pytest.raises(DomainError):
            cs.ap_table(F1, 9)
        with pytest.raises(DomainError):
            cs.ap_table(F1, 2)
        with pytest.raises(ResourceError):
            cs.ap_table(F1, 5003)
        with pytest.raises(ResourceError):
            cs.Q_exact(F1, 5003, 2)


class TestExactMoments:
    def test_published_values(self):
        t0 = time.perf_counter()
        assert cs.Q_exact(F1, 5, 4).as_fraction() == Fraction(-216, 25)
        assert cs.Q_exact(F1, 7, 4).as_fraction() == Fraction(528, 49)
        assert cs.Q_exact(F2, 3, 6).as_fraction() == Fraction(-8, 9)
        assert str(cs.Q_exact(F1, 5, 4)) == "-216/25"
        assert time.perf_counter() - t0 < 1.0

    def test_ap_power_against_symmetric_functions(self):
        for a in range(-4, 5):
            for v in range(0, 8):
                assert fm.ap_power(a, 5, v, False) == brute_ap_power(a, 5, v, False)

    def test_brute_force_Q(self):
        naive = brute_table(F1, 5)
        bad = {k: fm.is_bad(F1, *k, 5) for k in naive}
        total = sum(brute_ap_power(a, 5, 4, bad[k]) for k, a in naive.items())
        assert Fraction(total, 25) == Fraction(-216, 25)

    @pytest.mark.parametrize("family", [F1, F2])
    def test_odd_moments_vanish(self, family):
        for p in nt.odd_primes_upto(31):
            for v in (1, 3, 5, 7):
                assert cs.Q_exact(family, p, v).numerator == 0

    @pytest.mark.parametrize("family", [F1, F2])
    def test_square_moment_vanishes(self, family):
        for p in nt.odd_primes_upto(61):
            assert cs.Q_exact(family, p, 2).as_fraction() == 0

    def test_f2_fourth_moment_vanishes(self):
        for p in nt.odd_primes_upto(61):
            assert cs.Q_exact(F2, p, 4).as_fraction() == 0

    def test_f1_fourth_moment_nonzero(self):
        assert cs.Q_exact(F1, 11, 4).as_fraction() != 0

    def test_v_range(self):
        with pytest.raises(DomainError):
            cs.Q_exact(F1, 5, 13)
        with pytest.raises(DomainError):
            cs.Q_exact(F1, 5, 0)


class TestSecondMoment:
    def test_examples(self):
        assert cs.second_moment(F1, 3) == 2
        assert cs.second_moment(F1, 5) == 12
        assert cs.second_moment(F2, 3) == 4

    @pytest.mark.parametrize("family", [F1, F2])
    @pytest.mark.parametrize("p", [3, 5])
    def test_brute_force(self, family, p):
        naive = brute_table(family, p)
        assert cs.second_moment(family, p) == Fraction(sum(v * v for v in naive.values()), p)

    def test_closed_forms(self):
        for p in nt.odd_primes_upto(97):
            assert cs.second_moment(F1, p) == p * p - 3 * p + 2 == cs.good_pair_count(F1, p)
            assert cs.second_moment(F2, p) == p * p - 2 * p + 1 == cs.good_pair_count(F2, p)

    def test_max_lambda_pigeonhole(self):
        for p in nt.odd_primes_upto(97):
            t = cs.ap_table(F1, p)
            assert np.abs(t.ap).max() / np.sqrt(p) >= np.sqrt(1 - 3 / p)


class TestLocalFactor:
    def test_f1_p3(self):
        assert cs.local_factor_sum(F1, 3) == Fraction(1, 4)

    @pytest.mark.parametrize("family", [F1, F2])
    def test_direct_sum(self, family):
        p = 7
        naive = brute_table(family, p)
        total = Fraction(0)
        for (a, b), ap in naive.items():
            chi = 0 if fm.is_bad(family, a, b, p) else 1
            lam = Fraction(ap, p)  # lambda / sqrt(p)
            total += 1 / (1 - lam + Fraction(chi, p)) - 1
        assert cs.local_factor_sum(family, p) == total

    @pytest.mark.parametrize("family", [F1, F2])
    def test_q_series_converges(self, family):
        # expanding the local factor in powers of lambda gives sum_l Q(p^(2l)) / p^l
        for p in (5, 7, 11):
            exact = cs.local_factor_sum(family, p)
            errs = [abs(cs.q_series_sum(family, p, L) - exact) for L in (2, 4, 6)]
            assert errs[2] < errs[0] and errs[2] < 2e-3


class TestWeightedMoment:
    def test_v0(self, f1_prime):
        scaled = fm.scale(f1_prime, 1e6)
        _, _, w = fm.family_arrays(scaled)
        assert cs.weighted_moment_V(scaled, 5, 0) == pytest.approx(w.sum(), rel=1e-14)

    def test_v2_small(self, f1_prime):
        scaled = fm.scale(f1_prime, 1e6)
        M = scaled.predicted_size() * scaled.weight.mass
        assert abs(cs.weighted_moment_V(scaled, 5, 2)) / M < 0.02

    def test_v4_leading_term(self, f1_prime):
        lead = float(Fraction(-216, 25) / 24)
        devs = []
        for X in (1e6, 1e8):
            scaled = fm.scale(f1_prime, X)
            M = scaled.predicted_size() * scaled.weight.mass
            devs.append(abs(cs.weighted_moment_V(scaled, 5, 4) / (lead * M) - 1))
        assert devs[0] < 0.05 and devs[1] < devs[0]

    def test_bad_p(self):
        params = fm.validate_and_residues(F1, 3, 1, 2)
        with pytest.raises(DomainError):
            cs.weighted_moment_V(fm.scale(params, 1e6), 3, 2)

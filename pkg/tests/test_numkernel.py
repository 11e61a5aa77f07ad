import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from harmonic_trials import numkernel as nk
from harmonic_trials.errors import (
    DivergenceError,
    DomainError,
    LimitExceededError,
)

EULER_GAMMA = 0.5772156649015328606


class TestRisingFactorial:
    def test_examples(self):
        assert nk.log_rising_factorial(1.0, 3) == pytest.approx(math.log(6), abs=1e-14)
        assert nk.log_rising_factorial(0.5, 2) == pytest.approx(math.log(0.75), abs=1e-14)
        assert nk.log_rising_factorial(2.7, 0) == 0.0

    def test_domain(self):
        with pytest.raises(DomainError):
            nk.log_rising_factorial(0.0, 2)
        with pytest.raises(DomainError):
            nk.log_rising_factorial(-1.0, 2)

    def test_exact_fraction(self):
        assert nk.rising_factorial(Fraction(1, 2), 3) == Fraction(1, 2) * Fraction(3, 2) * Fraction(5, 2)
        assert nk.rising_factorial(5, 0) == 1

    def test_falling(self):
        assert nk.falling_factorial(5, 2) == 20
        assert nk.falling_factorial(3.0, 0) == 1.0


class TestDigamma:
    def test_euler_mascheroni(self):
        assert nk.digamma(1.0) == pytest.approx(-EULER_GAMMA, abs=1e-12)

    def test_recurrence_value(self):
        assert nk.digamma(2.0) == pytest.approx(1.0 - EULER_GAMMA, abs=1e-12)

    def test_asymptotic(self):
        x = 1e6
        assert nk.digamma(x) == pytest.approx(math.log(x) - 1.0 / (2 * x), abs=1e-12)

    def test_against_mpmath_grid(self):
        for x in [0.01, 0.1, 0.5, 1.0, 1.5, 3.7, 8.0, 25.0, 123.4, 1e4]:
            assert nk.digamma(x) == pytest.approx(float(mpmath.digamma(x)), abs=1e-12)

    @given(st.floats(min_value=1e-3, max_value=50.0, allow_nan=False))
    def test_recurrence_property(self, x):
        assert nk.digamma(x + 1.0) - nk.digamma(x) - 1.0 / x == pytest.approx(0.0, abs=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            nk.digamma(0.0)
        with pytest.raises(DomainError):
            nk.digamma(-3.0)


class TestStirling:
    def test_examples(self):
        t = nk.stirling_first_unsigned(5)
        assert t.unsigned(3, 2) == 3
        assert t.unsigned(4, 1) == 6
        assert t.unsigned(5, 5) == 1
        assert t.unsigned(0, 0) == 1
        assert t.unsigned(4, 0) == 0
        assert t.unsigned(3, 7) == 0

    def test_row_sums_are_factorials(self):
        t = nk.stirling_first_unsigned(100)
        fact = 1
        for n in range(101):
            assert sum(t.row(n)) == fact
            fact *= n + 1

    def test_recursion_invariant(self):
        t = nk.stirling_first_unsigned(40)
        for n in range(40):
            for k in range(n + 2):
                lhs = t.unsigned(n + 1, k)
                rhs = n * t.unsigned(n, k) + (t.unsigned(n, k - 1) if k >= 1 else 0)
                assert lhs == rhs

    @pytest.mark.parametrize("z", [0.5, 1.0, 2.0, 3.7])
    def test_polynomial_identity(self, z):
        # sum_k |s(n,k)| z^k = [z]_n
        t = nk.stirling_first_unsigned(30)
        for n in range(31):
            lhs = sum(c * z**k for k, c in enumerate(t.row(n)))
            rhs = nk.rising_factorial(z, n)
            assert lhs == pytest.approx(rhs, rel=1e-10)

    def test_limit(self):
        with pytest.raises(LimitExceededError):
            nk.stirling_first_unsigned(501)


class TestGeneralizedStirling:
    def test_examples(self):
        t = nk.generalized_stirling(3, 0.0)
        exact = nk.stirling_first_unsigned(3)
        for n in range(4):
            for k in range(n + 1):
                assert t.value(n, k) == pytest.approx(float(exact.unsigned(n, k)))
        t1 = nk.generalized_stirling(2, 1.0)
        assert t1.value(1, 0) == pytest.approx(1.0)
        assert t1.value(2, 2) == pytest.approx(1.0)
        assert nk.generalized_stirling(2, -3.3).value(2, 2) == pytest.approx(1.0)

    @pytest.mark.parametrize("r", [0.5, 1.0, 2.0, -0.7])
    def test_recursion_invariant(self, r):
        t = nk.generalized_stirling(30, r)
        for n in range(30):
            for k in range(n + 2):
                lhs = t.value(n + 1, k)
                rhs = (t.value(n, k - 1) if k >= 1 else 0.0) + (n + r) * t.value(n, k)
                assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)

    @pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("t_val", [0.5, 0.2, -0.5])
    def test_vertical_generating_identity(self, r, t_val):
        # k! sum_n s_r(n,k) t^n / n! -> (1-t)^(-r) (-log(1-t))^k
        n_top = 150  # |t|^150 makes the tail negligible at this tolerance
        table = nk.generalized_stirling(n_top, r)
        for k in range(5):
            total = 0.0
            log_fact = 0.0
            for n in range(n_top + 1):
                if n > 0:
                    log_fact += math.log(n)
                s = table.value(n, k)
                if s:
                    total += math.exp(math.log(s) - log_fact + n * math.log(abs(t_val))) * (
                        1.0 if t_val > 0 or n % 2 == 0 else -1.0
                    )
            total *= math.factorial(k)
            target = (1.0 - t_val) ** (-r) * (-math.log1p(-t_val)) ** k
            assert total == pytest.approx(target, rel=1e-10, abs=1e-12)


def _hsu_shiue_recursion_table(n_max, alpha, w2):
    """Oracle: S(n,k;-1,-alpha,w2) from the triangular recursion
    S(n+1,k) = S(n,k-1) + (n - k*alpha + w2) S(n,k), in exact rationals."""
    a, b = Fraction(alpha), Fraction(w2)
    rows = [[Fraction(1)]]
    for n in range(n_max):
        prev = rows[n]
        nxt = [Fraction(0)] * (n + 2)
        for k in range(n + 1):
            nxt[k] += (n - k * a + b) * prev[k]
            nxt[k + 1] += prev[k]
        rows.append(nxt)
    return rows


class TestDobinski:
    def test_examples(self):
        assert nk.dobinski_generalized(2, 1, 1.0, 0.0) == 0.0
        assert nk.dobinski_generalized(2, 2, 1.0, 0.0) == 1.0
        assert nk.dobinski_generalized(0, 0, 0.3, 2.0) == 1.0

    @pytest.mark.parametrize("alpha,w2", [(0.5, 0.0), (1.0, 1.0), (0.25, 1.5)])
    def test_matches_recursion_oracle(self, alpha, w2):
        rows = _hsu_shiue_recursion_table(12, alpha, w2)
        for n in range(13):
            for k in range(n + 1):
                assert nk.dobinski_generalized_exact(n, k, alpha, w2) == rows[n][k]

    def test_cancellation_regime_is_exact(self):
        # the alternating sum at k = 25 loses ~30 digits in floating point
        val = nk.dobinski_generalized_exact(26, 25, 0.5, 1.0)
        rows = _hsu_shiue_recursion_table(26, 0.5, 1.0)
        assert val == rows[26][25]

    def test_domain(self):
        with pytest.raises(DomainError):
            nk.dobinski_generalized(3, 1, 0.0, 1.0)
        with pytest.raises(DomainError):
            nk.dobinski_generalized(2, 3, 1.0, 1.0)


class TestGaussF1:
    def test_examples(self):
        assert nk.gauss_f1(0.7, 2.0, 0.0) == 1.0
        assert nk.gauss_f1(1.0, 3.0, 1.0) == pytest.approx(2.0, abs=1e-14)
        assert nk.gauss_f1(0.0, 1.3, 0.8) == 1.0

    def test_divergence_at_one(self):
        with pytest.raises(DivergenceError):
            nk.gauss_f1(2.0, 3.0, 1.0)

    def test_against_mpmath(self):
        for b in [0.3, 1.0, 2.5, 7.0]:
            for c in [0.8, 2.0, 5.5]:
                for z in [0.1, 0.5, 0.9, 0.99]:
                    ref = float(mpmath.hyp2f1(1, b, c, z))
                    assert nk.gauss_f1(b, c, z) == pytest.approx(ref, rel=1e-12)

    def test_partial_sums_monotone_in_z(self):
        # all series terms are nonnegative for b, z >= 0
        vals = [nk.gauss_f1(1.7, 2.2, z) for z in np.linspace(0.0, 0.95, 12)]
        assert all(a < b for a, b in zip(vals, vals[1:]))
        assert all(v >= 1.0 for v in vals)

    def test_terminating_negative_integer_b(self):
        # F(1,-2;c;z) is a quadratic polynomial
        b, c, z = -2.0, 1.5, 1.0
        expected = 1.0 + b / c * z + (b * (b + 1)) / (c * (c + 1)) * z**2
        assert nk.gauss_f1(b, c, z) == pytest.approx(expected, rel=1e-14)


class TestStirlingRatioTable:
    def test_matches_exact_table(self):
        w1 = 1.5
        t = nk.stirling_ratio_table(w1, 3, 30)
        exact = nk.stirling_first_unsigned(30)
        for n in range(31):
            for k in range(4):
                ref = float(exact.unsigned(n, k)) / nk.rising_factorial(w1 + 1.0, n)
                assert t[n, k] == pytest.approx(ref, rel=1e-12, abs=1e-300)

    def test_no_overflow_at_large_n(self):
        t = nk.stirling_ratio_table(0.5, 3, 2000)
        assert np.all(np.isfinite(t))

import math
from fractions import Fraction

import numpy as np
import pytest

from harmonic_trials import numkernel as nk
from harmonic_trials import passage_times as pt
from harmonic_trials import success_counts as sc
from harmonic_trials.errors import DomainError
from harmonic_trials.success_counts import Weights

from helpers import enumerate_passage_joint


class TestPassageTable:
    def test_first_column_telescopes(self):
        table = pt.passage_table(Weights(1, 1), 3, 60)
        for n in range(1, 61):
            assert table.prob(n, 1) == pytest.approx(1.0 / (n * (n + 1)), rel=1e-12)

    def test_diagonal_product(self):
        weights = Weights(1.3, 0.8)
        table = pt.passage_table(weights, 5, 20)
        prod = 1.0
        for l in range(1, 6):
            prod *= weights.w1 / (weights.w + l - 1)
            assert table.prob(l, l) == pytest.approx(prod, rel=1e-12)

    def test_hand_value(self):
        table = pt.passage_table(Weights(1, 1), 2, 10)
        assert table.prob(2, 2) == pytest.approx(1 / 6, abs=1e-15)

    def test_zero_below_diagonal(self):
        table = pt.passage_table(Weights(1, 1), 3, 10)
        assert table.prob(2, 3) == 0.0

    @pytest.mark.parametrize("w1,w2", [(1.0, 1.0), (0.5, 2.0), (2.6, 0.3), (1.0, 0.0)])
    def test_recursion_matches_definition(self, w1, w2):
        # P(K_l+ = n) = w1/(w+n-1) pi_{n-1}(l-1)
        weights = Weights(w1, w2)
        table = pt.passage_table(weights, 6, 40)
        for n in range(1, 41):
            pmf = sc.pmf_successes(weights, n - 1)
            for l in range(1, 7):
                expected = w1 / (weights.w + n - 1) * pmf.p(l - 1)
                assert table.prob(n, l) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("w1,w2", [(1.0, 1.0), (0.5, 2.0), (1.7, 0.0)])
    def test_inverse_sampling_duality(self, w1, w2):
        # P(K_l+ > n) = P(S_n < l)
        weights = Weights(w1, w2)
        n_max = 200
        table = pt.passage_table(weights, 6, n_max)
        col_cum = np.cumsum(table.entries, axis=0)
        for n in (1, 10, 50, 200):
            pmf = sc.pmf_successes(weights, n)
            for l in range(1, 7):
                lhs = 1.0 - col_cum[n, l]
                rhs = float(pmf.probs[:l].sum())
                assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_column_deficit_records_tail(self):
        weights = Weights(1, 1)
        table = pt.passage_table(weights, 1, 99)
        # P(K_1+ > 99) = 1/100
        assert table.column_deficit(1) == pytest.approx(0.01, rel=1e-10)
        col = table.column(1)
        assert col.offset == 1
        assert col.deficit == pytest.approx(0.01, rel=1e-10)


class TestEwensClosedForm:
    def test_special_case_l2(self):
        for n in range(2, 101):
            assert pt.passage_pmf_ewens(1.0, 2, n) == pytest.approx(
                1.0 / (n * (n - 1)), abs=1e-14
            )

    def test_singular_first_column(self):
        assert pt.passage_pmf_ewens(0.7, 1, 1) == 1.0
        assert pt.passage_pmf_ewens(0.7, 1, 4) == 0.0

    def test_hand_value(self):
        assert pt.passage_pmf_ewens(2.0, 2, 2) == pytest.approx(2 / 3, rel=1e-14)

    def test_matches_table(self):
        for w1 in (0.5, 1.0, 2.0):
            table = pt.passage_table(Weights(w1, 0.0), 4, 60)
            for l in range(1, 5):
                for n in range(1, 61):
                    assert pt.passage_pmf_ewens(w1, l, n) == pytest.approx(
                        table.prob(n, l), abs=1e-12
                    )

    @pytest.mark.parametrize("w1", [0.5, 1.0, 2.0])
    def test_vertical_identity(self, w1):
        # sum_{n>=l} |s(n,l)|/[w1+1]_n = w1^-l; the tail of the partial sum
        # is exactly w1^-l P(S_{N+1} <= l) by inverse-sampling duality,
        # computed through the (independent) success-count recursion.
        n_top = 600
        ratios = nk.stirling_ratio_table(w1, 3, n_top)
        tail_pmf = sc.pmf_successes(Weights(w1, 0.0), n_top + 1)
        for l in range(1, 4):
            partial = float(ratios[:, l].sum())
            target = w1 ** (-l)
            tail = target * float(tail_pmf.probs[: l + 1].sum())
            gap = target - partial
            assert -1e-9 <= gap <= tail + 1e-9
            assert partial + tail == pytest.approx(target, rel=1e-9)


class TestExcess:
    def test_zero_excess_mass(self):
        # P(K_l = 0) = w1^l / [w]_l
        weights = Weights(1.4, 0.9)
        for l in (1, 2, 4):
            pmf = pt.excess_pmf(weights, l, 30)
            expected = weights.w1**l / nk.rising_factorial(weights.w, l)
            assert pmf.p(0) == pytest.approx(expected, rel=1e-12)

    def test_shift_of_passage_law(self):
        pmf = pt.excess_pmf(Weights(1, 1), 1, 20)
        assert pmf.p(0) == pytest.approx(0.5, abs=1e-14)
        assert pmf.p(1) == pytest.approx(1 / 6, abs=1e-14)


class TestGapLaw:
    def test_ewens_l2_tail(self):
        # (w1,w2)=(1,0): P(L_2+ > i) = 1/(i+1)
        law = pt.gap_pmf(Weights(1.0, 0.0), 2, 30, 4000)
        cum = np.cumsum(law.probs.probs)
        for i in range(1, 31):
            assert 1.0 - cum[i - 1] == pytest.approx(1.0 / (i + 1), abs=1e-4)
        ii = np.arange(1, 31, dtype=float)
        assert np.max(np.abs(law.probs.probs - 1.0 / (ii * (ii + 1)))) <= 1e-10

    def test_first_gap_value_has_no_interior_factor(self):
        # P(L_l+ = 1) = sum_n P(K_{l-1}+ = n) w1/(w+n)
        weights = Weights(1.2, 0.9)
        horizon = 600
        law = pt.gap_pmf(weights, 3, 5, horizon)
        table = pt.passage_table(weights, 2, horizon)
        ns = np.arange(horizon + 1, dtype=float)
        direct = float(np.dot(table.entries[:, 2], weights.w1 / (weights.w + ns)))
        assert law.probs.p(1) == pytest.approx(direct, rel=1e-12)

    @pytest.mark.parametrize("w1,w2", [(1.0, 1.0), (0.7, 1.8)])
    @pytest.mark.parametrize("l", [2, 3])
    def test_joint_terms_match_enumeration(self, w1, w2, l):
        n_top = 12
        weights = Weights(w1, w2)
        oracle = enumerate_passage_joint(w1, w2, n_top, l)
        table = pt.passage_table(weights, l - 1, n_top)
        for (a, b), p_ref in oracle.items():
            i = b - a
            term = (
                table.prob(a, l - 1)
                * math.exp(
                    nk.log_rising_factorial(w2 + a, i - 1)
                    - nk.log_rising_factorial(weights.w + a, i - 1)
                )
                * w1
                / (weights.w + a + i - 1)
                if w2 + a > 0
                else (0.0 if i > 1 else table.prob(a, l - 1) * w1 / (weights.w + a))
            )
            assert term == pytest.approx(p_ref, abs=1e-13)

    def test_gap_pmf_matches_enumeration(self):
        w1, w2, l, n_top = 1.0, 1.0, 2, 12
        oracle = enumerate_passage_joint(w1, w2, n_top, l)
        by_gap = {}
        for (a, b), p in oracle.items():
            by_gap[b - a] = by_gap.get(b - a, 0.0) + p
        law = pt.gap_pmf(Weights(w1, w2), l, 5, 2000)
        # enumeration is truncated at K_l+ <= 12; compare against the same cut
        table = pt.passage_table(Weights(w1, w2), l - 1, n_top)
        for i in range(1, 6):
            cut = 0.0
            for a in range(1, n_top - i + 1):
                cut += (
                    table.prob(a, l - 1)
                    * math.exp(
                        nk.log_rising_factorial(w2 + a, i - 1)
                        - nk.log_rising_factorial(2.0 + a, i - 1)
                    )
                    * w1
                    / (2.0 + a + i - 1)
                )
            assert cut == pytest.approx(by_gap.get(i, 0.0), abs=1e-13)
            assert law.probs.p(i) >= cut - 1e-13

    def test_deficit_decreases_with_horizon(self):
        weights = Weights(0.8, 1.5)
        d = [
            pt.gap_pmf(weights, 2, 40, h, tol=1.0).probs.deficit
            for h in (50, 200, 800)
        ]
        assert d[0] >= d[1] >= d[2]

    def test_warns_when_uncertifiable(self):
        with pytest.warns(UserWarning, match="horizon"):
            law = pt.gap_pmf(Weights(0.5, 1.0), 2, 10, 60, tol=1e-9)
        assert law.n_truncation_bound > 1e-9


class TestNeuts:
    def test_examples(self):
        assert pt.gap_tail_neuts(1, 1) == pytest.approx(0.5)
        assert pt.gap_tail_neuts(2, 1) == pytest.approx(0.75)
        assert pt.gap_tail_neuts(3, 0) == 1.0

    def test_alternating_sum_stays_in_unit_interval(self):
        for l in range(1, 5):
            for i in range(0, 60, 7):
                v = pt.gap_tail_neuts(l, i)
                assert 0.0 <= v <= 1.0

    @pytest.mark.parametrize("l", [1, 2, 3, 4])
    def test_matches_gap_law_for_record_case(self, l):
        # Neuts indexing: tail of the gap following the l-th success = L_{l+1}+
        law = pt.gap_pmf(Weights(1.0, 0.0), l + 1, 30, 6000)
        cum = np.cumsum(law.probs.probs)
        for i in range(0, 31):
            tail = 1.0 - (cum[i - 1] if i >= 1 else 0.0)
            assert tail == pytest.approx(pt.gap_tail_neuts(l, i), abs=2e-4)


class TestConditionalStructure:
    def test_examples(self):
        weights = Weights(1, 1)
        assert pt.conditional_gap_tail(weights, 5, 0) == 1.0
        assert pt.conditional_gap_tail(weights, 1, 2) == pytest.approx(0.5, rel=1e-12)

    def test_reinforcement_ratio(self):
        weights = Weights(1.3, 0.6)
        for m in (1, 3, 10):
            for n in (1, 5, 20):
                ratio = pt.conditional_gap_tail(weights, m + 1, n) / pt.conditional_gap_tail(
                    weights, m, n
                )
                expected = (
                    (weights.w2 + m + n)
                    * (weights.w + m)
                    / ((weights.w + m + n) * (weights.w2 + m))
                )
                assert ratio == pytest.approx(expected, rel=1e-10)
                assert ratio > 1.0

    def test_monotone_in_m(self):
        weights = Weights(1, 1)
        vals = [pt.conditional_gap_tail(weights, m, 7) for m in range(1, 30)]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    def test_asymptote(self):
        weights = Weights(1, 1)
        index, pref = pt.tail_asymptote(weights, 0)
        assert index == 1.0
        assert pref == pytest.approx(1.0, rel=1e-12)
        n = 10**5
        for m in (1, 4):
            idx, c = pt.tail_asymptote(weights, m)
            val = pt.conditional_gap_tail(weights, m, n) * n**idx
            assert val == pytest.approx(c, rel=0.02)
        _, c0 = pt.tail_asymptote(weights, 0)
        _, c1 = pt.tail_asymptote(weights, 1)
        assert c1 / c0 == pytest.approx(weights.w / weights.w2, rel=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            pt.conditional_gap_tail(Weights(1, 0), -1, 3)
        with pytest.raises(DomainError):
            pt.tail_asymptote(Weights(1, 0), 0)

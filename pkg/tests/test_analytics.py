import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matchq import analytics
from matchq.errors import DegenerateModelError, DomainError, UnstableError
from matchq.rates import Rates2v2, ServiceOrder, SideRates, ZoneRates

rate = st.floats(min_value=0.01, max_value=10.0)


class TestKPlayer:
    @pytest.mark.parametrize("k,lam,expected", [(4, 1.0, 1.5), (1, 5.0, 0.0), (2, 0.5, 1.0)])
    def test_values(self, k, lam, expected):
        assert analytics.k_player_mean_wait(k, lam) == expected

    @pytest.mark.parametrize("k,lam", [(4, 0.0), (4, -1.0), (0, 1.0), (2.5, 1.0)])
    def test_domain(self, k, lam):
        with pytest.raises(DomainError):
            analytics.k_player_mean_wait(k, lam)

    @given(st.integers(1, 20), rate, st.floats(0.1, 10.0))
    def test_homogeneous_degree_minus_one(self, k, lam, c):
        assert math.isclose(analytics.k_player_mean_wait(k, c * lam),
                            analytics.k_player_mean_wait(k, lam) / c,
                            rel_tol=1e-12, abs_tol=1e-15)


class TestCentral:
    def test_values(self):
        assert analytics.central_2v2_mean_wait(Rates2v2(1, 0)) == 1.5
        assert analytics.central_2v2_mean_wait(Rates2v2(0.5, 0.25)) == 1.5

    def test_degenerate(self):
        with pytest.raises(DegenerateModelError):
            analytics.central_2v2_mean_wait(Rates2v2(0, 1))

    @given(rate, rate, st.floats(0.0, 1.0))
    def test_depends_only_on_total(self, l1, l2, shift):
        # move shift*l2 teams' worth of players into individuals, total fixed
        moved = shift * l2
        other = Rates2v2(l1 + 2 * moved, l2 - moved)
        assert math.isclose(analytics.central_2v2_mean_wait(Rates2v2(l1, l2)),
                            analytics.central_2v2_mean_wait(other), rel_tol=1e-12)

    def test_printed_variances_at_no_teams(self):
        r = Rates2v2(1, 0)
        assert analytics.central_variance_printed(r, "fifo") == pytest.approx(1.25, abs=1e-12)
        assert analytics.central_variance_printed(r, "lifo") == pytest.approx(1.75, abs=1e-12)

    @given(rate, st.floats(0.0, 10.0))
    def test_fifo_packing_identical(self, l1, l2):
        r = Rates2v2(l1, l2)
        assert (analytics.central_variance_printed(r, ServiceOrder.FIFO)
                == analytics.central_variance_printed(r, ServiceOrder.PACKING))

    def test_two_queue_order_rejected(self):
        with pytest.raises(DomainError):
            analytics.central_variance_printed(Rates2v2(1, 1), "twoqueue")


class TestTwoQueue:
    def test_fairness_example(self):
        s = analytics.two_queue_stats(Rates2v2(0.5, 0.25))
        assert s.mean_individual == pytest.approx(3.0, abs=1e-12)
        assert s.mean_team == pytest.approx(2.0, abs=1e-12)
        assert s.mean_overall == pytest.approx(2.5, abs=1e-12)
        assert s.variance_printed == pytest.approx(5.25, abs=1e-12)

    def test_overall_mean(self):
        assert analytics.two_queue_stats(Rates2v2(1, 1)).mean_overall == pytest.approx(5 / 6)

    @given(rate, rate)
    def test_overall_is_player_weighted(self, l1, l2):
        r = Rates2v2(l1, l2)
        s = analytics.two_queue_stats(r)
        weighted = (l1 * s.mean_individual + 2 * l2 * s.mean_team) / r.total
        assert math.isclose(s.mean_overall, weighted, rel_tol=1e-12)

    @pytest.mark.parametrize("l1,l2", [(0, 1), (1, 0)])
    def test_domain(self, l1, l2):
        with pytest.raises(DomainError):
            analytics.two_queue_stats(Rates2v2(l1, l2))


class TestMinVarianceRatio:
    def test_closed_form(self):
        assert analytics.two_queue_min_variance_ratio() == pytest.approx(2 * math.sqrt(33) - 11)

    def test_grid_minimizer(self):
        x = np.arange(1, 100_000) * 1e-5
        v = [analytics.two_queue_variance_printed_normalized(t) for t in x]
        assert abs(x[int(np.argmin(v))] - analytics.two_queue_min_variance_ratio()) < 1e-4

    def test_local_minimum(self):
        f = analytics.two_queue_variance_printed_normalized
        x = analytics.two_queue_min_variance_ratio()
        assert f(x) <= f(x - 0.01) and f(x) <= f(x + 0.01)


class TestSideSelection:
    def test_balanced_example(self):
        s = analytics.side_selection_stats(SideRates(0.3, 0.3, 0.4))
        assert s.pi0 == pytest.approx(1 / 2.9, abs=1e-12)
        assert s.mean_a == pytest.approx(0.7 / 0.16 / 2.9, abs=1e-12)
        assert s.mean_a == pytest.approx(1.508621, abs=1e-6)
        assert s.mean_b == s.mean_a
        assert s.mean_c == pytest.approx(0.344828, abs=1e-6)
        assert s.mean_overall == pytest.approx(1.043103, abs=1e-6)

    def test_all_choice_free_is_two_player_game(self):
        s = analytics.side_selection_stats(SideRates(0, 0, 1))
        assert s.mean_overall == pytest.approx(analytics.k_player_mean_wait(2, 1.0), abs=1e-12)

    def test_near_boundary_is_large(self):
        s = analytics.side_selection_stats(SideRates(0.499, 0.499, 0.002))
        assert s.mean_overall > 100

    @pytest.mark.parametrize("r", [SideRates(0.5, 0.3, 0.2), SideRates(0.5, 0.5, 0.0),
                                   SideRates(0.6, 0.1, 0.3), SideRates(0.4, 0.5, 0.1)])
    def test_unstable(self, r):
        assert not r.stable
        with pytest.raises(UnstableError):
            analytics.side_selection_stats(r)

    # reference values, lambda_total = 1
    @pytest.mark.parametrize("la,lb,lc,expected", [
        (0.45, 0.45, 0.1, 4.9108911), (0.4, 0.4, 0.2, 2.3461538), (0.3, 0.4, 0.3, 1.8796296),
        (0.2, 0.3, 0.5, 0.8736559), (0.1, 0.2, 0.7, 0.5953990), (0.0, 0.1, 0.9, 0.5138889),
    ])
    def test_reference_table(self, la, lb, lc, expected):
        assert analytics.side_selection_stats(SideRates(la, lb, lc)).mean_overall == pytest.approx(
            expected, abs=5e-7)

    @settings(max_examples=200)
    @given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.01, 1.0))
    def test_invariants(self, la, lb, lc):
        r = SideRates(la, lb, lc)
        if not r.stable or r.lambdaC - abs(la - lb) < 1e-3:
            return
        s = analytics.side_selection_stats(r)
        weighted = (la * s.mean_a + lb * s.mean_b + lc * s.mean_c) / r.total
        assert math.isclose(s.mean_overall, weighted, rel_tol=1e-12, abs_tol=1e-12 * s.mean_overall + 1e-12)
        assert math.isclose(s.improvement_factor, s.mean_c / s.mean_b, rel_tol=1e-12)
        t = analytics.side_selection_stats(r.swapped())
        assert math.isclose(t.mean_a, s.mean_b, rel_tol=1e-12)
        assert math.isclose(t.mean_b, s.mean_a, rel_tol=1e-12)
        assert math.isclose(t.mean_overall, s.mean_overall, rel_tol=1e-12)


class TestQDerivative:
    def test_values(self):
        assert analytics.side_selection_q_derivative(0.4) == pytest.approx(1 / 0.36 - 4)
        assert analytics.side_selection_q_derivative(1e-12) == pytest.approx(-3)

    def test_finite_difference(self):
        h = 1e-6
        f = analytics.side_selection_improvement
        fd = (f(0.3 + h) - f(0.3 - h)) / (2 * h)
        assert fd == pytest.approx(analytics.side_selection_q_derivative(0.3), rel=1e-4)

    @pytest.mark.parametrize("lb", [0.0, 0.5, 0.7])
    def test_domain(self, lb):
        with pytest.raises(DomainError):
            analytics.side_selection_q_derivative(lb)


class TestTwoZone:
    def test_uniform_example(self):
        r = ZoneRates(1 / 3, 1 / 3, 1 / 3)
        s = analytics.two_zone_stats(r)
        assert s.pi0 == pytest.approx(3 / 8, abs=1e-12)
        assert s.mean_c == pytest.approx(0.375, abs=1e-12)
        assert s.mean_a == pytest.approx(0.9375, abs=1e-12)
        assert s.mean_b == pytest.approx(0.9375, abs=1e-12)
        assert s.improvement_factor == pytest.approx(0.4, abs=1e-12)
        pi = analytics.two_zone_stationary(r)
        expected = {"0": 3 / 8, "A": 3 / 16, "B": 3 / 16, "AB": 1 / 16, "BA": 1 / 16, "C": 1 / 8}
        for k, v in expected.items():
            assert pi[k] == pytest.approx(v, abs=1e-12)

    @pytest.mark.parametrize("la,lb,lc,q", [(0.5, 0.5, 0, 0.25), (0.8, 0.2, 0, 0.1),
                                            (0.3, 0.7, 0, 0.35)])
    def test_q_landmarks(self, la, lb, lc, q):
        assert analytics.two_zone_stats(ZoneRates(la, lb, lc)).improvement_factor == pytest.approx(
            q, abs=1e-12)

    # reference values (3 decimals), lambda_total = 1
    @pytest.mark.parametrize("lb,la,lc,et,etb,etc", [
        (0.1, 0.8, 0.1, 0.828, 3.321, 0.336), (0.3, 0.5, 0.2, 0.840, 1.226, 0.330),
        (0.6, 0.2, 0.2, 0.810, 0.690, 0.344),
    ])
    def test_reference_table(self, lb, la, lc, et, etb, etc):
        s = analytics.two_zone_stats(ZoneRates(la, lb, lc))
        assert s.mean_overall == pytest.approx(et, abs=1e-3)
        assert s.mean_b == pytest.approx(etb, abs=1e-3)
        assert s.mean_c == pytest.approx(etc, abs=1e-3)

    @settings(max_examples=200)
    @given(st.floats(0.0, 2.0), st.floats(0.0, 2.0), st.floats(0.0, 2.0))
    def test_invariants(self, la, lb, lc):
        if la + lc < 1e-3 or lb + lc < 1e-3:
            return
        r = ZoneRates(la, lb, lc)
        s = analytics.two_zone_stats(r)
        t = analytics.two_zone_stats(r.swapped())
        assert math.isclose(t.mean_a, s.mean_b, rel_tol=1e-12)
        assert math.isclose(t.mean_b, s.mean_a, rel_tol=1e-12)
        assert 0 < s.improvement_factor <= 1 + 1e-12
        assert math.isclose(s.improvement_factor, s.mean_c / s.mean_b, rel_tol=1e-12)

    @given(st.floats(0.01, 2.0), st.floats(0.0, 2.0))
    def test_q_equal_junior_advanced(self, x, lc):
        s = analytics.two_zone_stats(ZoneRates(x, x, lc))
        assert abs(s.improvement_factor - (x + lc) / (4 * x + lc)) < 1e-12

    def test_domain(self):
        with pytest.raises(DomainError):
            analytics.two_zone_stats(ZoneRates(0, 1, 0))


def test_rates_validation():
    with pytest.raises(DomainError):
        Rates2v2(-1, 1)
    with pytest.raises(DomainError):
        SideRates(0, 0, 0)
    with pytest.raises(DomainError):
        ZoneRates(float("nan"), 1, 1)
    assert Rates2v2(1, 2).total == 5
    assert SideRates(0.3, 0.3, 0.4).stable
    assert not SideRates(0.3, 0.3, 0.0).stable

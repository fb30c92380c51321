import math
import random

import numpy as np
import pytest
import scipy.stats

from graspbench.analytics import (
    AnalyticsError,
    SessionData,
    bonferroni_adjust,
    fit_experience_curve,
    fit_line_through_origin,
    kruskal_wallis,
    midranks,
    pairwise_tests,
    ssr,
    summarize,
)
from oracles import brute_h, brute_midranks, exact_perm_p


class TestSsr:
    def test_fraction(self):
        flags = [True] * 228 + [False] * 2
        assert ssr(flags) == pytest.approx(228 / 230)

    def test_all_correct(self):
        assert ssr([True, True]) == 1.0

    def test_all_wrong(self):
        assert ssr([False, False]) == 0.0

    def test_empty_rejected(self):
        with pytest.raises(AnalyticsError):
            ssr([])


class TestExperienceCurve:
    def test_exact_power_law_recovered(self):
        n_true = math.log(0.85) / math.log(2)
        points = [(x, 3.0 * x**n_true) for x in range(1, 31)]
        fit = fit_experience_curve(points)
        assert abs(fit.b - 0.85) < 1e-9
        assert abs(fit.k - 3.0) < 1e-9
        assert fit.b == 2.0**fit.n
        assert fit.r_squared == pytest.approx(1.0)

    def test_flat_curve_means_no_learning(self):
        fit = fit_experience_curve([(x, 2.0) for x in range(1, 11)])
        assert fit.n == pytest.approx(0.0, abs=1e-12)
        assert fit.b == pytest.approx(1.0)
        assert fit.le_percent == pytest.approx(100.0)

    def test_noisy_recovery_within_one_point(self):
        # 1% multiplicative noise, 30 points, target efficiency 93.5%
        n_true = math.log2(0.935)
        for seed in range(100):
            rng = random.Random(seed)
            points = [(x, 2.5 * x**n_true * (1.0 + rng.gauss(0.0, 0.01))) for x in range(1, 31)]
            fit = fit_experience_curve(points)
            assert abs(fit.le_percent - 93.5) <= 1.0

    def test_scale_equivariance(self):
        points = [(x, 1.7 * x**-0.1) for x in range(1, 13)]
        base = fit_experience_curve(points)
        scaled = fit_experience_curve([(x, 10.0 * y) for x, y in points])
        assert scaled.k == pytest.approx(10.0 * base.k)
        assert scaled.n == pytest.approx(base.n)
        assert scaled.b == pytest.approx(base.b)
        assert scaled.le_percent == pytest.approx(base.le_percent)

    def test_rejects_bad_input(self):
        with pytest.raises(AnalyticsError):
            fit_experience_curve([(1, 1.0), (2, 2.0)])
        with pytest.raises(AnalyticsError):
            fit_experience_curve([(1, 1.0), (2, -2.0), (3, 1.0)])


class TestMidranks:
    def test_matches_brute_force(self):
        rng = random.Random(3)
        for _ in range(200):
            values = [rng.randrange(0, 6) for _ in range(rng.randrange(1, 12))]
            assert list(midranks(values)) == brute_midranks(values)


class TestKruskalWallis:
    def test_hand_computed_example(self):
        result = kruskal_wallis([[1, 2, 3], [4, 5, 6]])
        # rank sums 6 and 15 over N=6: H = 12/42 * (12 + 75) - 21
        assert result.h_statistic == pytest.approx(3.857142857, abs=1e-6)
        assert result.p_value == pytest.approx(0.0495, abs=5e-4)
        assert result.degrees_freedom == 1

    def test_identical_groups(self):
        result = kruskal_wallis([[2, 2, 2], [2, 2, 2]])
        assert result.h_statistic == 0.0
        assert result.p_value == 1.0
        assert result.tie_correction_applied

    def test_matches_brute_force_h_with_ties(self):
        rng = random.Random(5)
        for _ in range(300):
            k = rng.randrange(2, 4)
            groups = [[rng.randrange(0, 4) for _ in range(rng.randrange(1, 5))] for _ in range(k)]
            if sum(len(g) for g in groups) < 3:
                continue
            ours = kruskal_wallis(groups).h_statistic
            assert ours == pytest.approx(brute_h(groups), abs=1e-9)

    def test_matches_scipy_where_defined(self):
        rng = random.Random(6)
        for _ in range(100):
            groups = [[rng.gauss(0, 1) for _ in range(rng.randrange(2, 8))] for _ in range(3)]
            ours = kruskal_wallis(groups)
            ref_h, ref_p = scipy.stats.kruskal(*groups)
            assert ours.h_statistic == pytest.approx(ref_h, abs=1e-9)
            assert ours.p_value == pytest.approx(ref_p, abs=1e-9)

    def test_monotone_transform_invariance(self):
        rng = random.Random(8)
        groups = [[rng.random() for _ in range(6)] for _ in range(3)]
        base = kruskal_wallis(groups).h_statistic
        transformed = [[math.exp(3 * v) for v in g] for g in groups]
        assert kruskal_wallis(transformed).h_statistic == pytest.approx(base, abs=1e-12)

    def test_exact_permutation_matches_enumeration_oracle(self):
        cases = [
            [[1, 2, 3], [4, 5, 6]],
            [[1, 5], [2, 4], [3, 6]],
            [[1, 1, 2], [2, 3]],
            [[7, 3], [3, 9, 1]],
        ]
        for groups in cases:
            ours = kruskal_wallis(groups, exact=True)
            assert ours.p_value == pytest.approx(exact_perm_p(groups), abs=1e-12)

    def test_exact_limited_to_small_inputs(self):
        with pytest.raises(AnalyticsError):
            kruskal_wallis([[1] * 8, [2] * 8], exact=True)

    def test_input_validation(self):
        with pytest.raises(AnalyticsError):
            kruskal_wallis([[1, 2, 3]])
        with pytest.raises(AnalyticsError):
            kruskal_wallis([[1, 2], []])
        with pytest.raises(AnalyticsError):
            kruskal_wallis([[1], [2]])


class TestBonferroni:
    def test_scales(self):
        assert bonferroni_adjust([0.01], 6) == [0.06]

    def test_caps_at_one(self):
        assert bonferroni_adjust([0.5], 6) == [1.0]

    def test_zero_stays_zero(self):
        assert bonferroni_adjust([0.0], 1000) == [0.0]

    def test_monotone_and_idempotent_at_cap(self):
        ps = [0.001, 0.01, 0.2, 0.9]
        adj = bonferroni_adjust(ps, 4)
        assert adj == sorted(adj)  # order preserved under a monotone map
        assert bonferroni_adjust([1.0], 5) == [1.0]  # re-adjusting the cap holds

    def test_validation(self):
        with pytest.raises(AnalyticsError):
            bonferroni_adjust([0.1, 0.2], 1)
        with pytest.raises(AnalyticsError):
            bonferroni_adjust([1.5], 2)


class TestPairwise:
    def test_four_groups_six_pairs(self):
        rng = random.Random(1)
        groups = {k: [rng.random() for _ in range(5)] for k in "abcd"}
        matrix = pairwise_tests(groups)
        assert len(matrix) == 6

    def test_identical_groups_all_one(self):
        groups = {k: [1.0, 2.0, 3.0] for k in "abc"}
        matrix = pairwise_tests(groups)
        assert all(p == 1.0 for p in matrix.values())

    def test_separated_pair_detected(self):
        rng = random.Random(2)
        base = [rng.gauss(0, 1) for _ in range(200)]
        iqr = float(np.percentile(base, 75) - np.percentile(base, 25))
        groups = {
            "a": [rng.gauss(0, 1) for _ in range(200)],
            "b": [rng.gauss(0, 1) for _ in range(200)],
            "c": [rng.gauss(0, 1) for _ in range(200)],
            "d": [rng.gauss(0, 1) + 3 * iqr for _ in range(200)],
        }
        matrix = pairwise_tests(groups)
        assert matrix[("a", "d")] < 0.001
        assert matrix[("c", "d")] < 0.001


class TestOriginFit:
    def test_exact_line(self):
        fit = fit_line_through_origin([(1, 0.9), (2, 1.8), (3, 2.7)])
        assert fit.slope == pytest.approx(0.9)
        assert fit.r_squared == pytest.approx(1.0)

    def test_closed_form(self):
        assert fit_line_through_origin([(1, 1), (2, 1)]).slope == pytest.approx(0.6)

    def test_degenerate_x(self):
        with pytest.raises(AnalyticsError):
            fit_line_through_origin([(0, 1), (0, 2)])


def _record(set_index, slot, grasp, st_ms, correct=True, steps=None):
    from graspbench.domain import Grasp, SelectionEvent, Source, TrialRecord

    sel = (SelectionEvent(1000 + (st_ms or 0), grasp, Source.TAP),) if correct else ()
    return TrialRecord(
        set_index=set_index,
        slot_index=slot,
        target_object=0,
        target_grasp=grasp,
        t_operation_enter=1000,
        t_operation_exit=3000,
        selections=sel,
        t_first_fixation=1000,
        final_grasp=grasp if correct else None,
        st_ms=st_ms if correct else None,
        st_anchor="fixation",
        correct=correct,
        error_count=0,
        steps_required=steps,
    )


class TestSummarize:
    def test_single_trial_median(self):
        from graspbench.domain import Grasp

        data = [SessionData("i-gsi", "s1", 1, [_record(1, 1, Grasp.PINCH, 840)])]
        report = summarize(data)
        assert report["per_gsi"]["i-gsi"]["st"]["median"] == pytest.approx(0.84)
        assert report["n_trials"] == 1

    def test_empty_stratum_noted(self):
        from graspbench.domain import Grasp

        data = [SessionData("app", "s1", 1, [_record(1, 1, Grasp.PINCH, 900)])]
        report = summarize(data)
        assert report["per_gsi"]["app"]["per_grasp_st"]["Hook"]["n"] == 0
        assert "note" in report["per_gsi"]["app"]["per_grasp_st"]["Hook"]

    def test_steps_regression_present_for_cycling(self):
        from graspbench.domain import Grasp

        recs = [
            _record(1, i + 1, Grasp.PINCH, 900 * d, steps=d)
            for i, d in enumerate([1, 2, 3, 4, 5])
        ]
        data = [SessionData("fsm", "s1", 1, recs)]
        report = summarize(data)
        fit = report["per_gsi"]["fsm"]["st_by_steps"]["origin_fit"]
        assert fit["slope"] == pytest.approx(0.9)

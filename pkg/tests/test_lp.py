"""LP moments, comoments, selection, LPINFOR and the dependence report."""

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.stats import spearmanr

from lpstats import (
    build_score_basis,
    correlations,
    lhermite_normality,
    lp_comoments,
    lp_moments,
    lpinfor,
    make_sample,
    select_significant,
)
from lpstats.errors import DegenerateScale, LengthMismatch

from conftest import random_sample_values


def basis_for(x, m=4):
    s = make_sample(x)
    return s, build_score_basis(s, min(m, s.r - 1))


class TestLPMoments:
    def test_first_moment_by_direct_sum(self):
        rng = np.random.default_rng(20)
        x = random_sample_values(rng, 120)
        s, b = basis_for(x)
        z = (s.values - s.mean) / s.sd
        expected = float(np.sum(s.masses * z * b.table[0]))
        vec = lp_moments(s, b)
        assert_allclose(vec.moments[0], expected, rtol=1e-13)

    def test_bessel_bound(self):
        rng = np.random.default_rng(21)
        for _ in range(40):
            x = random_sample_values(rng, int(rng.integers(6, 200)),
                                     tied=bool(rng.integers(0, 2)))
            s, b = basis_for(x)
            vec = lp_moments(s, b)
            assert np.sum(vec.moments ** 2) <= 1.0 + 1e-12

    def test_monotone_map_only_changes_z(self):
        # scores are rank functions, so an affine map of x leaves the
        # moments unchanged (z is affine invariant too)
        rng = np.random.default_rng(22)
        x = random_sample_values(rng, 90)
        s1, b1 = basis_for(x)
        s2, b2 = basis_for(4.0 * x - 2.0)
        assert_allclose(lp_moments(s1, b1).moments,
                        lp_moments(s2, b2).moments, atol=1e-12)

    def test_tail_index_first_crossing(self):
        # smallest order whose raw cumulative squared moments reach the
        # threshold, counting orders from one; Z is standardized so the
        # cumulative squares estimate explained variance directly
        s, b = basis_for(np.arange(10.0))
        vec = lp_moments(s, b, m=3)
        cum = np.cumsum(vec.moments ** 2)
        crossed = np.flatnonzero(cum >= 0.95)
        expected = int(crossed[0]) + 1 if crossed.size else None
        assert vec.tail_index == expected

    def test_tail_index_uniform_sample_is_one(self):
        # equally spaced atoms are the T_1 score itself, so the first
        # moment carries essentially all the variance
        s, b = basis_for(np.arange(50.0))
        vec = lp_moments(s, b)
        assert vec.tail_index == 1
        assert vec.moments[0] ** 2 > 0.95

    def test_tail_index_none_when_threshold_unreachable(self):
        rng = np.random.default_rng(23)
        x = rng.standard_normal(50)
        s, b = basis_for(x)
        vec = lp_moments(s, b, threshold=1.0 + 1e-9)
        assert vec.tail_index is None

    def test_constant_sample_rejected(self):
        s = make_sample([1.0, 1.0, 2.0])
        b = build_score_basis(s, 1)
        sc = make_sample([5.0, 5.0])
        with pytest.raises(DegenerateScale):
            lp_moments(sc, b)


class TestSelectSignificant:
    def test_aic_threshold_is_two_over_n(self):
        n = 50
        keep = np.sqrt(2.0 / n) * 1.05
        drop = np.sqrt(2.0 / n) * 0.95
        assert select_significant(np.array([keep]), n).tolist() == [True]
        assert select_significant(np.array([drop]), n).tolist() == [False]

    def test_bic_threshold_is_log_n_over_n(self):
        n = 50
        keep = np.sqrt(np.log(n) / n) * 1.05
        drop = np.sqrt(np.log(n) / n) * 0.95
        assert select_significant(np.array([keep]), n,
                                  rule="bic").tolist() == [True]
        assert select_significant(np.array([drop]), n,
                                  rule="bic").tolist() == [False]

    def test_none_rule_keeps_everything(self):
        c = np.array([0.5, 1e-9, -0.2])
        assert select_significant(c, 10, rule="none").all()

    def test_selection_is_prefix_of_magnitude_order(self):
        rng = np.random.default_rng(24)
        for _ in range(50):
            c = rng.standard_normal(6) * 0.3
            n = int(rng.integers(10, 500))
            sel = select_significant(c, n)
            order = np.argsort(-(c ** 2), kind="stable")
            ranks_selected = np.flatnonzero(sel[order])
            # chosen cells occupy the leading magnitude ranks
            assert ranks_selected.tolist() == list(range(ranks_selected.size))

    def test_penalized_objective_is_maximal(self):
        rng = np.random.default_rng(25)
        for _ in range(50):
            c = rng.standard_normal(5) * 0.25
            n = int(rng.integers(10, 400))
            sel = select_significant(c, n)
            pen = 2.0 / n
            best = float(np.sum(c[sel] ** 2) - pen * sel.sum())
            order = np.argsort(-(c ** 2), kind="stable")
            prefix_values = [0.0] + list(
                np.cumsum(c[order] ** 2) - pen * np.arange(1, c.size + 1))
            assert_allclose(best, max(prefix_values), rtol=1e-12, atol=1e-15)

    def test_all_noise_selects_nothing(self):
        c = np.full(4, 1e-6)
        assert not select_significant(c, 100).any()


class TestLPComoments:
    def test_identity_pair_gives_identity_matrix(self):
        x = np.arange(1.0, 41.0)
        s, b = basis_for(x)
        mat = lp_comoments(x, x, b, b)
        assert_allclose(mat.entries, np.eye(4), atol=1e-9)

    def test_swap_transposes(self):
        rng = np.random.default_rng(26)
        x = random_sample_values(rng, 100)
        y = random_sample_values(rng, 100)
        _, bx = basis_for(x)
        _, by = basis_for(y)
        m1 = lp_comoments(x, y, bx, by)
        m2 = lp_comoments(y, x, by, bx)
        assert_allclose(m1.entries, m2.entries.T, atol=1e-13)

    def test_rank_invariance(self):
        rng = np.random.default_rng(27)
        x = rng.standard_normal(80)
        y = rng.standard_normal(80) + 0.5 * x
        _, bx = basis_for(x)
        _, by = basis_for(y)
        ref = lp_comoments(x, y, bx, by).entries
        xt = np.exp(x)
        yt = y ** 3
        _, bxt = basis_for(xt)
        _, byt = basis_for(yt)
        assert_allclose(lp_comoments(xt, yt, bxt, byt).entries, ref,
                        atol=1e-11)

    def test_rectangular_when_margin_is_short(self):
        x = np.array([0.0, 1.0, 0.0, 1.0, 0.0, 1.0])  # r = 2, one score
        y = np.arange(6.0)
        _, bx = basis_for(x)
        _, by = basis_for(y)
        mat = lp_comoments(x, y, bx, by, m=4)
        assert mat.entries.shape == (1, 4)

    def test_independent_margins_have_small_entries(self):
        rng = np.random.default_rng(28)
        x = rng.standard_normal(4000)
        y = rng.standard_normal(4000)
        _, bx = basis_for(x)
        _, by = basis_for(y)
        mat = lp_comoments(x, y, bx, by)
        # comoments are mean-of-bounded-products, O(1/sqrt(n)) under
        # independence; 6 sigma of 1/sqrt(4000) is about .095
        assert np.max(np.abs(mat.entries)) < 0.095

    def test_length_mismatch(self):
        x = np.arange(5.0)
        _, bx = basis_for(x)
        with pytest.raises(LengthMismatch):
            lp_comoments(x, np.arange(4.0), bx, bx)

    def test_lpinfor_is_squared_sum_of_selected(self):
        rng = np.random.default_rng(29)
        x = rng.standard_normal(120)
        y = x + 0.3 * rng.standard_normal(120)
        _, bx = basis_for(x)
        _, by = basis_for(y)
        mat = lp_comoments(x, y, bx, by)
        assert_allclose(lpinfor(mat),
                        float(np.sum(mat.entries[mat.selected] ** 2)),
                        rtol=1e-14)
        assert_allclose(mat.lpinfor, lpinfor(mat), rtol=0)


class TestCorrelations:
    def test_pearson_matches_numpy(self):
        rng = np.random.default_rng(30)
        x = rng.standard_normal(150)
        y = 0.6 * x + rng.standard_normal(150)
        rep = correlations(x, y)
        assert_allclose(rep.pearson, np.corrcoef(x, y)[0, 1], rtol=1e-12)

    def test_spearman_matches_scipy_without_ties(self):
        rng = np.random.default_rng(31)
        x = rng.standard_normal(200)
        y = rng.standard_normal(200) - 0.4 * x
        rep = correlations(x, y)
        assert_allclose(rep.spearman_mid, spearmanr(x, y).statistic,
                        rtol=1e-12)

    def test_perfect_monotone_dependence(self):
        x = np.arange(1.0, 31.0)
        rep = correlations(x, x ** 3)
        assert_allclose(rep.spearman_mid, 1.0, rtol=1e-13)
        rep = correlations(x, -x)
        assert_allclose(rep.spearman_mid, -1.0, rtol=1e-13)

    def test_gini_pair_is_asymmetric_in_general(self):
        rng = np.random.default_rng(32)
        x = rng.standard_normal(300)
        y = np.exp(x) + 0.1 * rng.standard_normal(300)
        rep = correlations(x, y)
        assert abs(rep.gini_xy - rep.gini_yx) > 1e-4
        for val in (rep.gini_xy, rep.gini_yx):
            assert -1.0 <= val <= 1.0


class TestLHermiteNormality:
    def test_two_point_sample_is_not_flagged(self):
        s = make_sample([0.0, 1.0])
        res = lhermite_normality(s)
        assert_allclose(res.statistic, 1.0, rtol=1e-12)
        assert not res.significant

    def test_normal_data_passes(self):
        rng = np.random.default_rng(33)
        s = make_sample(rng.standard_normal(500))
        res = lhermite_normality(s)
        assert not res.significant
        assert res.statistic > 0.99

    def test_exponential_data_flagged(self):
        rng = np.random.default_rng(34)
        s = make_sample(rng.exponential(size=500))
        res = lhermite_normality(s)
        assert res.significant
        assert res.statistic < 0.99

    def test_statistic_is_a_correlation(self):
        rng = np.random.default_rng(35)
        for _ in range(20):
            s = make_sample(random_sample_values(rng, 100,
                                                 tied=bool(rng.integers(2))))
            if s.r < 2:
                continue
            res = lhermite_normality(s)
            assert 0.0 < res.statistic <= 1.0 + 1e-12

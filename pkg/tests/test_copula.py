"""Copula density series, conditional slices, curves and regression."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from lpstats import (
    build_score_basis,
    conditional_density,
    conditional_mean,
    conditional_quantile,
    conditional_slice,
    eval_copula,
    fit_copula,
    make_sample,
    quantile_curves,
    series_regression,
    simulate_conditional,
    slice_modes,
)
from lpstats.errors import DomainError

from conftest import random_sample_values


def atom_levels(s):
    """One probability level inside each atom's cdf interval."""
    return s.fmid


def exact_double_integral(mod):
    """Step integral of the raw series over the unit square."""
    ux = atom_levels(mod.sx)
    vy = atom_levels(mod.sy)
    grid = eval_copula(mod, ux[:, None], vy[None, :])
    return float(mod.sx.masses @ grid @ mod.sy.masses)


def joint_ratio_table(x, y):
    """Empirical cop(u, v) at the atoms: joint mass over product mass."""
    sx, sy = make_sample(x), make_sample(y)
    joint = np.zeros((sx.r, sy.r))
    for xi, yi in zip(x, y):
        i = np.searchsorted(sx.values, xi)
        j = np.searchsorted(sy.values, yi)
        joint[i, j] += 1.0 / len(x)
    return joint / np.outer(sx.masses, sy.masses), sx, sy


class TestEvalCopula:
    def test_matches_manual_series_at_a_point(self):
        rng = np.random.default_rng(60)
        x = rng.standard_normal(80)
        y = x + rng.standard_normal(80)
        mod = fit_copula(x, y)
        u, v = 0.3, 0.7
        iu = np.searchsorted(mod.sx.cdf, u, side="left")
        iv = np.searchsorted(mod.sy.cdf, v, side="left")
        manual = 1.0 + mod.bx.table[:, iu] @ mod.coefficients \
            @ mod.by.table[:, iv]
        assert_allclose(eval_copula(mod, u, v), manual, rtol=1e-13)

    def test_unselected_cells_do_not_contribute(self):
        rng = np.random.default_rng(61)
        x = rng.standard_normal(120)
        y = 0.8 * x + rng.standard_normal(120)
        mod = fit_copula(x, y)
        coef = mod.coefficients
        assert_allclose(coef[~mod.lpm.selected], 0.0, rtol=0)
        assert_allclose(coef[mod.lpm.selected],
                        mod.lpm.entries[mod.lpm.selected], rtol=0)

    def test_double_integral_is_exactly_one(self):
        rng = np.random.default_rng(62)
        for _ in range(5):
            x = random_sample_values(rng, 150, tied=bool(rng.integers(2)))
            y = random_sample_values(rng, 150, tied=bool(rng.integers(2)))
            mod = fit_copula(x, y)
            assert_allclose(exact_double_integral(mod), 1.0, atol=1e-12)

    def test_diagonal_concentration_for_identical_margins(self):
        x = np.arange(1.0, 61.0)
        mod = fit_copula(x, x)
        for u in (0.1, 0.3):
            assert eval_copula(mod, u, u) > eval_copula(mod, u, 1.0 - u)

    def test_clipped_floor(self):
        x = np.arange(1.0, 61.0)
        mod = fit_copula(x, -x)
        u = np.linspace(0.05, 0.95, 20)
        dens = eval_copula(mod, u, u, clipped=True)
        assert np.all(dens >= 1e-6)

    def test_domain(self):
        mod = fit_copula(np.arange(10.0), np.arange(10.0))
        with pytest.raises(DomainError):
            eval_copula(mod, 0.0, 0.5)
        with pytest.raises(DomainError):
            eval_copula(mod, 0.5, 1.0)


class TestBayesFactorization:
    def test_discrete_table_recovers_joint_over_product(self):
        # on a finite table the full-order series is a complete basis, so
        # the fitted copula at the atoms IS the joint/product ratio
        x = np.array([0., 0., 0., 0., 1., 1., 1., 1., 1., 1.])
        y = np.array([0., 1., 2., 2., 0., 0., 1., 1., 2., 2.])
        ratio, sx, sy = joint_ratio_table(x, y)
        mod = fit_copula(x, y, order=4, rule="none")
        grid = eval_copula(mod, atom_levels(sx)[:, None],
                           atom_levels(sy)[None, :])
        assert_allclose(grid, ratio, atol=1e-12)

    def test_slice_matches_conditional_pmf(self):
        x = np.array([0., 0., 0., 1., 1., 1., 1.])
        y = np.array([2., 2., 5., 5., 5., 9., 9.])
        ratio, sx, sy = joint_ratio_table(x, y)
        mod = fit_copula(x, y, rule="none")
        sl = conditional_slice(mod, float(sx.fmid[0]))
        cond_pmf = ratio[0] * sy.masses  # P(Y = y_j | X = x_0)
        # the raw series carries the exact identity; the normalized
        # density differs only by the 1e-6 clip floor at the zero cell
        assert_allclose(sl.raw * sy.masses, cond_pmf, atol=1e-12)
        assert_allclose(sl.density * sy.masses, cond_pmf, atol=1e-5)


class TestConditionalSlice:
    def test_normalizes_exactly(self):
        rng = np.random.default_rng(63)
        x = rng.standard_normal(200)
        y = x ** 2 + 0.3 * rng.standard_normal(200)
        mod = fit_copula(x, y)
        for u in (0.05, 0.3, 0.5, 0.7, 0.95):
            sl = conditional_slice(mod, u)
            assert_allclose(mod.sy.masses @ sl.density, 1.0, rtol=1e-13)
            assert np.all(sl.density > 0.0)

    def test_clipping_only_adds_mass(self):
        # the raw series integrates to one for any weights, so the
        # pre-normalization mass can never fall below one and the
        # degenerate-slice guard stays quiet on fitted models
        rng = np.random.default_rng(64)
        x = rng.standard_normal(100)
        y = -x + 0.1 * rng.standard_normal(100)
        mod = fit_copula(x, y)
        for u in np.linspace(0.02, 0.98, 25):
            sl = conditional_slice(mod, float(u))
            assert_allclose(mod.sy.masses @ sl.raw, 1.0, atol=1e-12)
            assert sl.mass >= 1.0 - 1e-12

    def test_density_lookup_matches_slice(self):
        rng = np.random.default_rng(65)
        x = rng.standard_normal(90)
        y = x + rng.standard_normal(90)
        mod = fit_copula(x, y)
        sl = conditional_slice(mod, 0.4)
        v = atom_levels(mod.sy)
        assert_allclose(conditional_density(mod, 0.4, v), sl.density)

    def test_domain(self):
        mod = fit_copula(np.arange(12.0), np.arange(12.0))
        with pytest.raises(DomainError):
            conditional_slice(mod, 0.0)
        with pytest.raises(DomainError):
            conditional_slice(mod, 1.0)


class TestConditionalMean:
    def test_equals_step_sum(self):
        rng = np.random.default_rng(66)
        x = rng.standard_normal(150)
        y = 2.0 * x + rng.standard_normal(150)
        mod = fit_copula(x, y)
        sl = conditional_slice(mod, 0.25)
        manual = float((mod.sy.masses * sl.density) @ mod.sy.values)
        assert_allclose(conditional_mean(mod, 0.25), manual, rtol=0)

    def test_tracks_monotone_dependence(self):
        rng = np.random.default_rng(67)
        x = rng.standard_normal(400)
        y = x + 0.2 * rng.standard_normal(400)
        mod = fit_copula(x, y)
        means = [conditional_mean(mod, u) for u in (0.1, 0.5, 0.9)]
        assert means[0] < means[1] < means[2]

    def test_independence_flattens_the_curve(self):
        rng = np.random.default_rng(68)
        x = rng.standard_normal(2000)
        y = rng.standard_normal(2000)
        mod = fit_copula(x, y)
        means = [conditional_mean(mod, u) for u in (0.2, 0.5, 0.8)]
        assert np.ptp(means) < 0.25 * mod.sy.sd


class TestConditionalQuantile:
    def test_strictly_ordered_in_p(self):
        rng = np.random.default_rng(69)
        x = rng.standard_normal(250)
        y = x + rng.standard_normal(250)
        mod = fit_copula(x, y)
        ps = [0.05, 0.25, 0.5, 0.75, 0.95]
        for u in (0.1, 0.5, 0.9):
            qs = [conditional_quantile(mod, u, p) for p in ps]
            assert np.all(np.diff(qs) > 0)

    def test_median_of_symmetric_slice(self):
        x = np.arange(1.0, 201.0)
        rng = np.random.default_rng(70)
        y = rng.permutation(200).astype(float)  # independent-ish ranks
        mod = fit_copula(x, y)
        q = conditional_quantile(mod, 0.5, 0.5)
        # for a near-flat slice the conditional median sits near the
        # marginal mid-quantile median
        from lpstats import mid_quantile
        assert abs(q - mid_quantile(mod.sy, 0.5)) < 20.0

    def test_quantile_curves_agree_with_pointwise(self):
        rng = np.random.default_rng(71)
        x = rng.standard_normal(120)
        y = 0.5 * x + rng.standard_normal(120)
        mod = fit_copula(x, y)
        us = np.array([0.2, 0.5, 0.8])
        ps = [0.25, 0.5, 0.75]
        means, table = quantile_curves(mod, us, ps)
        for i, u in enumerate(us):
            assert_allclose(means[i], conditional_mean(mod, float(u)),
                            rtol=0)
            for j, p in enumerate(ps):
                assert_allclose(table[i, j],
                                conditional_quantile(mod, float(u), p),
                                rtol=0)

    def test_domain(self):
        mod = fit_copula(np.arange(15.0), np.arange(15.0))
        with pytest.raises(DomainError):
            conditional_quantile(mod, 0.5, 0.0)


class TestSliceModes:
    def test_flat_slice_is_unimodal(self):
        rng = np.random.default_rng(72)
        x = rng.standard_normal(500)
        y = rng.standard_normal(500)
        mod = fit_copula(x, y)
        if not mod.lpm.selected.any():
            count, _ = slice_modes(mod, 0.5)
            assert count == 1

    def test_monotone_slice_has_boundary_mode(self):
        x = np.arange(1.0, 101.0)
        mod = fit_copula(x, x)
        count, where = slice_modes(mod, 0.05)
        assert count >= 1
        assert min(where) <= np.quantile(x, 0.2)

    def test_hand_built_plateau_merge(self):
        # two separated peaks with a clipped valley: the run-length merge
        # must count exactly two modes however wide the flat floor is
        x = np.arange(1.0, 41.0)
        y = np.concatenate([np.arange(1.0, 21.0), np.arange(1.0, 21.0)])
        mod = fit_copula(x, y, order=4)
        counts = [slice_modes(mod, u)[0] for u in (0.1, 0.9)]
        for c in counts:
            assert c >= 1


class TestSimulateConditional:
    def test_draws_live_on_y_support(self):
        rng = np.random.default_rng(73)
        x = random_sample_values(rng, 80)
        y = random_sample_values(rng, 80)
        mod = fit_copula(x, y)
        draws = simulate_conditional(mod, 0.3, 300, seed=5)
        assert draws.size == 300
        lo, hi = mod.sy.values[0], mod.sy.values[-1]
        assert np.all((draws >= lo) & (draws <= hi))

    def test_seeded_determinism(self):
        mod = fit_copula(np.arange(50.0), np.arange(50.0) ** 2)
        a = simulate_conditional(mod, 0.6, 200, seed=1)
        b = simulate_conditional(mod, 0.6, 200, seed=1)
        assert_allclose(a, b, rtol=0)


class TestSeriesRegression:
    def test_recovers_function_in_score_span(self):
        rng = np.random.default_rng(74)
        x = rng.standard_normal(100)
        s = make_sample(x)
        b = build_score_basis(s, 3)
        y_atoms = 2.0 + 1.5 * b.table[0] - 0.7 * b.table[2]
        y = y_atoms[s.atom_index]
        fit = series_regression(x, y, b, rule="none")
        assert_allclose(fit.predict(s.values), y_atoms, atol=1e-10)
        assert_allclose(fit.coefficients[0], 1.5, atol=1e-10)
        assert_allclose(fit.coefficients[1], 0.0, atol=1e-10)
        assert_allclose(fit.coefficients[2], -0.7, atol=1e-10)

    def test_constant_response(self):
        x = np.arange(20.0)
        s = make_sample(x)
        b = build_score_basis(s, 3)
        fit = series_regression(x, np.full(20, 3.5), b)
        assert not fit.selected.any()
        assert_allclose(fit.predict([0.0, 10.0, 19.0]), 3.5, rtol=0)

    def test_invariant_under_increasing_x_transform(self):
        rng = np.random.default_rng(75)
        x = rng.standard_normal(150)
        y = np.sin(x) + 0.1 * rng.standard_normal(150)
        s1 = make_sample(x)
        fit1 = series_regression(x, y, build_score_basis(s1, 4))
        xt = np.exp(x)
        s2 = make_sample(xt)
        fit2 = series_regression(xt, y, build_score_basis(s2, 4))
        assert_allclose(fit1.coefficients, fit2.coefficients, atol=1e-11)
        assert_allclose(fit1.predict(s1.values), fit2.predict(s2.values),
                        atol=1e-10)

    def test_prediction_between_atoms_is_a_step(self):
        x = np.array([1.0, 2.0, 4.0, 8.0])
        y = np.array([0.0, 1.0, 4.0, 9.0])
        s = make_sample(x)
        fit = series_regression(x, y, build_score_basis(s, 3), rule="none")
        assert fit.predict(3.0) == fit.predict(2.0)
        assert fit.predict(-1.0) == fit.predict(1.0)

import math

import numpy as np
import pytest
import scipy.stats

from fjopinions import (
    DimensionMismatch,
    EmptySample,
    InputError,
    SusceptibilityProfile,
    Verdict,
    WeightedGraph,
    chi_square_sign_test,
    detect_manipulation,
    fj_equilibrium,
    reconstruct_intrinsic,
    response_matrix,
    t_test_one_sample,
)
from fjopinions.stats import betainc_regularized, chi2_sf_1dof, student_t_two_sided_p
from conftest import gnp_with_edges, random_weighted_graph


class TestSpecialFunctions:
    def test_betainc_against_scipy(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            a = float(rng.uniform(0.5, 50))
            b = float(rng.uniform(0.5, 50))
            x = float(rng.uniform(0, 1))
            assert np.isclose(betainc_regularized(a, b, x),
                              scipy.stats.beta.cdf(x, a, b), atol=1e-12)

    def test_t_sf_against_scipy(self):
        for dof in (1, 2, 5, 30, 199, 999):
            for t in (-7.5, -2.0, -0.3, 0.0, 0.5, 1.96, 4.0, 25.0):
                expected = 2 * scipy.stats.t.sf(abs(t), dof)
                assert np.isclose(student_t_two_sided_p(t, dof), expected,
                                  atol=1e-12)

    def test_chi2_sf_against_scipy(self):
        for x in (0.0, 0.3, 1.0, 2.7, 10.0, 64.0):
            assert np.isclose(chi2_sf_1dof(x), scipy.stats.chi2.sf(x, df=1),
                              atol=1e-13)


class TestTTest:
    def test_symmetric_sample_is_null(self):
        t, p, dof = t_test_one_sample([5.0, 6.0, 4.0], mu0=5.0)
        assert t == 0.0 and p == 1.0 and dof == 2

    def test_null_calibration_seeded(self):
        # p-values under the null are ~uniform; P(p > .05) = .95 per trial
        mu0 = 1.7
        ok = 0
        for seed in range(100):
            data = mu0 + np.random.default_rng(seed).standard_normal(1000)
            _, p, _ = t_test_one_sample(data, mu0)
            ok += p > 0.05
        assert ok >= 90

    def test_constant_shift_with_jitter_rejects(self):
        rng = np.random.default_rng(1)
        data = 2.0 + 1.0 + 1e-9 * rng.standard_normal(50)
        _, p, _ = t_test_one_sample(data, mu0=2.0)
        assert p < 1e-30

    def test_zero_variance_paths(self):
        t, p, dof = t_test_one_sample(np.full(5, 3.0), mu0=1.0)
        assert math.isinf(t) and t > 0 and p == 0.0 and dof == 4
        t, p, dof = t_test_one_sample(np.full(5, 1.0), mu0=1.0)
        assert t == 0.0 and p == 1.0

    def test_matches_scipy_on_random_samples(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            data = rng.standard_normal(int(rng.integers(3, 400))) * 2 + 0.3
            t, p, dof = t_test_one_sample(data, mu0=0.1)
            ref = scipy.stats.ttest_1samp(data, popmean=0.1)
            assert np.isclose(t, ref.statistic, atol=1e-10)
            assert np.isclose(p, ref.pvalue, atol=1e-12)
            assert dof == len(data) - 1

    def test_shift_invariance(self):
        rng = np.random.default_rng(3)
        data = rng.standard_normal(40)
        _, p0, _ = t_test_one_sample(data, mu0=0.2)
        _, p1, _ = t_test_one_sample(data + 11.5, mu0=0.2 + 11.5)
        assert np.isclose(p0, p1, atol=1e-12)

    def test_scale_invariance(self):
        rng = np.random.default_rng(4)
        data = rng.standard_normal(40) + 0.4
        _, p0, _ = t_test_one_sample(data, mu0=0.0)
        _, p1, _ = t_test_one_sample(data * 123.0, mu0=0.0)
        assert np.isclose(p0, p1, atol=1e-12)

    def test_needs_two_points(self):
        with pytest.raises(InputError):
            t_test_one_sample([1.0], mu0=0.0)


class TestChiSquareSignTest:
    def test_balanced_counts(self):
        data = np.array([1.0] * 50 + [-1.0] * 50)
        chi2, p = chi_square_sign_test(data, p0=0.5)
        assert chi2 == 0.0 and p == 1.0

    def test_lopsided_counts(self):
        data = np.array([1.0] * 90 + [-1.0] * 10)
        chi2, p = chi_square_sign_test(data, p0=0.5)
        assert np.isclose(chi2, 64.0, atol=1e-12)
        assert p < 1e-10

    def test_mild_imbalance(self):
        data = np.array([1.0] * 55 + [-1.0] * 45)
        chi2, p = chi_square_sign_test(data, p0=0.5)
        assert np.isclose(chi2, 1.0, atol=1e-12)
        assert np.isclose(p, scipy.stats.chi2.sf(1.0, 1), atol=1e-12)

    def test_zero_counts_as_positive(self):
        chi2_a, _ = chi_square_sign_test([0.0, -1.0], p0=0.5)
        chi2_b, _ = chi_square_sign_test([1.0, -1.0], p0=0.5)
        assert chi2_a == chi2_b

    def test_empty_sample(self):
        with pytest.raises(EmptySample):
            chi_square_sign_test([], p0=0.5)

    def test_bad_p0(self):
        with pytest.raises(InputError):
            chi_square_sign_test([1.0], p0=1.0)


class TestReconstruction:
    def test_inverts_equilibrium_map_exactly(self):
        rng = np.random.default_rng(8)
        for _ in range(5):
            g = random_weighted_graph(12, 0.4, rng)
            prof = SusceptibilityProfile(rng.uniform(0.1, 0.9, size=g.n))
            s_prime = rng.standard_normal(g.n)
            z_prime = fj_equilibrium(g, prof, s_prime)
            back = reconstruct_intrinsic(g, prof, z_prime)
            scale = max(1.0, np.max(np.abs(s_prime)))
            assert np.max(np.abs(back.values - s_prime)) <= 1e-8 * scale

    def test_edgeless_identity(self):
        g = WeightedGraph.from_edges(3, [])
        z = np.array([0.4, -1.0, 2.0])
        back = reconstruct_intrinsic(g, SusceptibilityProfile.shared(0.3, 3), z)
        assert np.allclose(back.values, z, atol=1e-12)

    def test_k2_worked_example(self, k2):
        prof = SusceptibilityProfile.shared(0.5, 2)
        back = reconstruct_intrinsic(k2, prof, np.array([2 / 3, 0.0]))
        assert np.allclose(back.values, [4 / 3, -2 / 3], atol=1e-12)

    def test_dimension_mismatch(self, k2):
        with pytest.raises(DimensionMismatch):
            reconstruct_intrinsic(k2, SusceptibilityProfile.shared(0.5, 2),
                                  np.ones(3))


class TestDetectManipulation:
    @staticmethod
    def _setup(n=200, seed=0):
        g = gnp_with_edges(n, 0.05, seed=seed)
        prof = SusceptibilityProfile.shared(0.5, n)
        rm = response_matrix(g, prof)
        return g, prof, rm

    def test_null_calibration(self):
        g, prof, rm = self._setup()
        mu0, sigma = 0.5, 1.0
        rejects = 0
        trials = 500
        for t in range(trials):
            rng = np.random.default_rng(1000 + t)
            s = mu0 + sigma * rng.standard_normal(g.n)
            z = rm.solve_equilibrium(s)
            out = detect_manipulation(g, prof, z, mu0=mu0, significance=0.05)
            rejects += out.verdict is Verdict.MANIPULATION
        assert 0.01 <= rejects / trials <= 0.10

    def test_power_against_shifted_reports(self):
        g, prof, rm = self._setup()
        mu0, sigma = 0.0, 1.0
        k = g.n // 10  # 10% deviators shifted by +5 sigma
        flagged = 0
        trials = 200
        for t in range(trials):
            rng = np.random.default_rng(5000 + t)
            s = mu0 + sigma * rng.standard_normal(g.n)
            S = rng.choice(g.n, size=k, replace=False)
            s_rep = s.copy()
            s_rep[S] += 5.0 * sigma
            z = rm.solve_equilibrium(s_rep)
            out = detect_manipulation(g, prof, z, mu0=mu0, significance=0.05)
            flagged += out.verdict is Verdict.MANIPULATION
        assert flagged / trials >= 0.95

    def test_degenerate_sample_reports_p_one(self):
        g = WeightedGraph.from_edges(4, [])
        prof = SusceptibilityProfile.shared(0.5, 4)
        mu0 = 0.7
        out = detect_manipulation(g, prof, np.full(4, mu0), mu0=mu0)
        assert out.p_value == 1.0
        assert out.verdict is Verdict.NO_MANIPULATION

    def test_verdict_matches_threshold(self):
        g, prof, rm = self._setup(n=50)
        rng = np.random.default_rng(77)
        s = rng.standard_normal(g.n)
        z = rm.solve_equilibrium(s)
        out = detect_manipulation(g, prof, z, mu0=0.0, significance=1.0)
        assert out.verdict is Verdict.MANIPULATION  # p < 1 almost surely
        out = detect_manipulation(g, prof, z, mu0=0.0, significance=0.0)
        assert out.verdict is Verdict.NO_MANIPULATION

import numpy as np
import pytest

import fedlowrank as fl


def two_level(lam=1.0, xi=1e-6, r_star=5, d=200):
    return fl.Spectrum(np.array([lam] * r_star + [xi] * (d - r_star)))


class TestEpsMin:
    def test_zero_beyond_rank(self):
        s = fl.Spectrum(np.array([3.0, 1.0, 0.0, 0.0]))
        assert fl.eps_min(s, 2) == 0.0
        assert fl.eps_min(s, 4) == 0.0

    def test_small_example(self):
        s = fl.Spectrum(np.array([2.0, 1.0, 1.0]))
        assert fl.eps_min(s, 1) == pytest.approx(2.0)
        assert fl.eps_min(s, 0) == pytest.approx(6.0)

    def test_matches_eckart_young_oracle(self):
        s = fl.gaussian(20, 14, 5)
        spectrum = fl.singular_values(s)
        eig = fl.sym_eig(fl.DenseMatrix(s.ndarray.T @ s.ndarray))
        for r in (1, 4, 9):
            v_star = fl.DenseMatrix(eig.eigenvectors.ndarray[:, :r])
            u_hat = fl.exact_solution(s, v_star)
            err = 2.0 * fl.loss_value(s, u_hat, v_star)
            assert err == pytest.approx(fl.eps_min(spectrum, r), rel=1e-8)

    def test_domain(self):
        s = fl.Spectrum(np.array([1.0]))
        with pytest.raises(ValueError):
            fl.eps_min(s, 2)
        with pytest.raises(ValueError):
            fl.eps_min(s, -1)


class TestThm3Bound:
    def test_zero_tail(self):
        s = fl.Spectrum(np.array([2.0, 1.0, 0.0, 0.0]))
        assert fl.thm3_bound(s, 2, 0, 0.25) == 0.0

    def test_flat_spectrum_collapses_to_floor(self):
        s = fl.Spectrum(np.full(10, 1.5))
        for alpha in (0, 2):
            assert fl.thm3_bound(s, 4, alpha, 0.25) == pytest.approx(
                fl.eps_min(s, 4), rel=1e-12
            )

    def test_two_level_alpha1_regression(self):
        # (xi/lam)^4 = 1e-24 annihilates the multiplier: bound == eps_min
        # to machine accuracy (exact excess ~7.8e-22 relative)
        s = two_level()
        bound = fl.thm3_bound(s, 5, 1, 0.25)
        floor = fl.eps_min(s, 5)
        assert bound == pytest.approx(floor, rel=1e-12)
        assert bound / floor - 1.0 <= 1e-20

    def test_always_at_least_eps_min(self):
        s = fl.singular_values(fl.gaussian(30, 12, 8))
        for r in (1, 5, 11):
            for alpha in (0, 1):
                assert fl.thm3_bound(s, r, alpha, 0.25) >= fl.eps_min(s, r)

    def test_variants_differ_as_documented(self):
        s = fl.singular_values(fl.gaussian(25, 10, 9))
        a = fl.thm3_bound(s, 3, 0, 0.25, "appendix")
        m = fl.thm3_bound(s, 3, 0, 0.25, "main_text")
        # p=1/4: appendix multiplier 2r*16*(ln4 + r ln2), main 2r*4*(ln16 + r ln2)
        assert a > m
        with pytest.raises(ValueError):
            fl.thm3_bound(s, 3, 0, 0.25, "blog_post")

    def test_rank_deficiency_and_domain(self):
        s = fl.Spectrum(np.array([1.0, 0.0, 0.0]))
        with pytest.raises(fl.RankDeficientError):
            fl.thm3_bound(s, 2, 0, 0.25)
        with pytest.raises(ValueError):
            fl.thm3_bound(two_level(), 5, 0, 1.0)


class TestCor1Eps:
    def test_zero_tail(self):
        s = fl.Spectrum(np.array([2.0, 1.0, 0.0]))
        assert fl.cor1_eps(s, 2, 0) == 0.0

    def test_two_level_alpha_ratio_exact(self):
        s = two_level()
        e0, e1 = fl.cor1_eps(s, 5, 0), fl.cor1_eps(s, 5, 1)
        assert e1 / e0 == pytest.approx(1e-24, rel=1e-12)

    def test_alpha_doubling_bound(self):
        s = fl.singular_values(fl.gaussian(40, 15, 11))
        r_star = 6
        ratio_max = (s.sigma(r_star + 1) / s.sigma(r_star)) ** 4
        for alpha in (1, 2):
            lhs = fl.cor1_eps(s, r_star, 2 * alpha) / fl.cor1_eps(s, r_star, alpha)
            assert lhs <= ratio_max**alpha * (1 + 1e-12)

    def test_monotone_in_alpha(self):
        s = fl.singular_values(fl.gaussian(30, 10, 12))
        values = [fl.cor1_eps(s, 4, a) for a in range(4)]
        assert all(b <= a for a, b in zip(values, values[1:]))


class TestErrorReport:
    def test_flags(self):
        s = two_level(d=40)
        floor = fl.eps_min(s, 5)
        rep = fl.error_report(s, 5, 0, 0.25, measured_error=floor * 1.5)
        assert rep.holds_floor and rep.holds_thm3
        assert rep.eps_min == floor
        rep_bad = fl.error_report(s, 5, 0, 0.25, measured_error=rep.thm3_bound * 2)
        assert not rep_bad.holds_thm3


class TestMonteCarlo:
    def _small_two_level(self, seed=13):
        spec = fl.SyntheticSpec(
            num_clients=5, rows_per_client=40, dim=40, true_rank=3,
            signal_values=(1.0, 1.0, 1.0), noise_std=1e-5, seed=seed,
        )
        return fl.generate_synthetic(spec)

    def test_coverage_on_noisy_data(self):
        ds = self._small_two_level()
        cov = fl.verify_thm3_montecarlo(ds, r=3, alpha=0, p=0.25, trials=60, base_seed=3)
        assert cov >= 0.4

    def test_rank_deficient_recovery_counts_as_covered(self):
        spec = fl.SyntheticSpec(
            num_clients=4, rows_per_client=10, dim=12, true_rank=2,
            signal_values=(2.0, 1.0), noise_std=0.0, seed=14,
        )
        ds = fl.generate_synthetic(spec)
        errors = fl.bounds.thm3_trial_errors(ds, 2, 0, trials=60, base_seed=4)
        scale = fl.frobenius_sq(ds.concatenated())
        assert all(e <= 1e-16 * scale for e in errors)
        cov = fl.verify_thm3_montecarlo(ds, r=2, alpha=0, p=0.25, trials=60, base_seed=4)
        assert cov == 1.0

    def test_coverage_nondecreasing_in_alpha_paired(self):
        ds = self._small_two_level(seed=15)
        covs = [
            fl.verify_thm3_montecarlo(ds, r=3, alpha=a, p=0.25, trials=60, base_seed=6)
            for a in (0, 1, 2)
        ]
        assert all(b >= a for a, b in zip(covs, covs[1:]))

    def test_trials_floor(self):
        ds = self._small_two_level(seed=16)
        with pytest.raises(ValueError):
            fl.verify_thm3_montecarlo(ds, r=3, alpha=0, p=0.25, trials=10)

    def test_prop1_floor_across_probes(self):
        ds = self._small_two_level(seed=17)
        spectrum = fl.singular_values(ds.concatenated())
        scale = fl.frobenius_sq(ds.concatenated())
        errors = fl.bounds.thm3_trial_errors(ds, 3, 0, trials=50, base_seed=7)
        floor = fl.eps_min(spectrum, 3)
        assert all(e >= floor - 1e-9 * scale for e in errors)

import math
import warnings

import numpy as np
import pytest

from heraldspec.analysis import (
    ABSORBANCE_CEILING,
    AbsorbanceClampWarning,
    absorbance_spectrum,
    fit_precision_scaling,
    quantum_advantage,
    required_photons,
    resolution_analysis,
)
from heraldspec.engine import EnsembleStats, ExperimentConfig, run_coherent_ensemble
from heraldspec.errors import DomainError, FitError, ResolutionUndefinedError
from heraldspec.samples import FlatProfile
from heraldspec.source import SourceConfig


def stats_from(estimates, herald):
    estimates = np.asarray(estimates, dtype=float)
    herald = np.broadcast_to(np.asarray(herald, dtype=float), estimates.shape).copy()
    var = float(np.var(estimates, ddof=1)) if estimates.size > 1 else 0.0
    return EnsembleStats(
        estimates=estimates, herald_counts=herald, counts=np.zeros((estimates.size, 3)),
        mean=float(estimates.mean()), variance=var,
        stderr_of_mean=math.sqrt(var / estimates.size), mean_herald_counts=float(herald.mean()),
        total_detected_photons=0,
    )


def binomial_stats(alpha, n_herald, trials, seed):
    rng = np.random.default_rng(seed)
    n_ab = rng.binomial(n_herald, 1.0 - alpha, trials)
    return stats_from(1.0 - n_ab / n_herald, n_herald)


class TestQuantumAdvantage:
    def test_batch_count(self):
        report = quantum_advantage(binomial_stats(0.778, 1000, 1500, 1), batch_size=100)
        assert report.n_batches == 15
        assert report.per_batch_advantage.shape == (15,)
        assert report.stderr_percent >= 0
        assert report.theoretical_max_percent == pytest.approx(22.2, abs=0.5)

    def test_trailing_trials_ignored(self):
        assert quantum_advantage(binomial_stats(0.5, 1000, 1550, 2)).n_batches == 15

    def test_unbiased_over_many_batches(self):
        # 1000 batches of 100 at alpha = 0.778: batch-variance Monte Carlo oracle
        report = quantum_advantage(binomial_stats(0.778, 1000, 100_000, 3), batch_size=100)
        assert abs(report.mean_advantage_percent - 22.2) < 3 * report.stderr_percent
        assert report.stderr_percent < 0.5
        assert not report.exceeds_bound()

    def test_exact_snl_variance_is_zero_advantage(self):
        alpha, nbar, size = 0.6, 500.0, 100
        z = np.random.default_rng(4).standard_normal(size)
        z = (z - z.mean()) / z.std(ddof=1)
        batch = alpha + z * math.sqrt((1 - alpha) / nbar)
        report = quantum_advantage(stats_from(np.tile(batch, 15), nbar), batch_size=size)
        np.testing.assert_allclose(report.per_batch_advantage, 0.0, atol=1e-12)
        assert report.mean_advantage_percent == pytest.approx(0.0, abs=1e-10)

    def test_laser_ensemble_shows_no_advantage(self):
        cfg = ExperimentConfig(source=SourceConfig(pair_rate=1000 / 0.35),
                               sample=FlatProfile(0.5), trials=3000, temperature=100.0)
        report = quantum_advantage(run_coherent_ensemble(cfg), batch_size=100)
        assert abs(report.mean_advantage_percent) < 3 * report.stderr_percent

    def test_simulated_baseline(self):
        fock = binomial_stats(0.5, 1000, 1500, 5)
        rng = np.random.default_rng(6)
        laser = stats_from(1 - rng.poisson(500, 1500) / 1000, 1000)
        report = quantum_advantage(fock, batch_size=100, baseline=laser)
        assert abs(report.mean_advantage_percent - 50.0) < 4 * report.stderr_percent

    def test_single_batch_flags_stderr(self):
        report = quantum_advantage(binomial_stats(0.5, 1000, 150, 7), batch_size=100)
        assert report.n_batches == 1
        assert not report.stderr_defined and math.isnan(report.stderr_percent)

    def test_errors(self):
        with pytest.raises(DomainError):
            quantum_advantage(binomial_stats(0.5, 100, 50, 8), batch_size=100)
        with pytest.raises(DomainError):
            quantum_advantage(binomial_stats(0.5, 100, 50, 8), batch_size=1)

    def test_total_absorption_batches(self):
        report = quantum_advantage(stats_from(np.ones(200), 1000.0), batch_size=100)
        assert report.mean_advantage_percent == 0.0
        assert report.theoretical_max_percent == 0.0


class TestAbsorbanceSpectrum:
    def test_zero(self):
        spec = absorbance_spectrum([(800.0, 0.0), (801.0, 0.0)])
        assert spec.absorbance.tolist() == [0.0, 0.0]

    def test_quarter(self):
        spec = absorbance_spectrum([(800.0, 0.25)])
        assert spec.absorbance[0] == pytest.approx(0.2876820724517809, abs=1e-15)
        assert absorbance_spectrum([(800.0, 0.25)], decadic=True).absorbance[0] == pytest.approx(
            math.log10(4 / 3))

    def test_order_and_ranking(self):
        lams = [790.0, 780.0, 800.0]
        low = absorbance_spectrum([(lam, 0.20) for lam in lams])
        high = absorbance_spectrum([(lam, 0.25) for lam in lams])
        assert low.wavelengths.tolist() == lams
        assert np.all(high.absorbance > low.absorbance)

    def test_clamping(self):
        with pytest.warns(AbsorbanceClampWarning):
            spec = absorbance_spectrum([(800.0, 1.0), (801.0, 0.5), (802.0, 1.2)])
        assert spec.n_clamped == 2
        assert np.all(np.isfinite(spec.absorbance))
        assert spec.absorbance[0] == pytest.approx(-math.log1p(-ABSORBANCE_CEILING))

    def test_negative_noise_passes_through(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            spec = absorbance_spectrum([(800.0, -0.01)])
        assert spec.absorbance[0] == pytest.approx(-math.log(1.01))

    def test_nan_rejected(self):
        with pytest.raises(DomainError):
            absorbance_spectrum([(800.0, math.nan)])


class TestFitPrecisionScaling:
    def test_noiseless(self):
        fit = fit_precision_scaling([(n, 0.5 / math.sqrt(n)) for n in (1e2, 1e3, 1e4)])
        assert fit.coefficient == pytest.approx(0.5, abs=1e-12)
        assert fit.residual_rms < 1e-12
        assert fit.predict(400.0) == pytest.approx(0.025)

    def test_binomial_monte_carlo(self):
        rng = np.random.default_rng(9)
        points = []
        for n in (100, 200, 400, 800, 1600, 3200):
            est = 1.0 - rng.binomial(n, 0.8, 800) / n
            points.append((n, est.std(ddof=1)))
        assert fit_precision_scaling(points).coefficient == pytest.approx(0.4, rel=0.05)

    def test_degenerate(self):
        with pytest.raises(FitError):
            fit_precision_scaling([(100, 0.04)] * 3)
        with pytest.raises(FitError):
            fit_precision_scaling([(100, 0.04), (200, 0.03)])
        with pytest.raises(FitError):
            fit_precision_scaling([(100, 0.04), (200, 0.0), (300, 0.02)])


def exact_series(c, mean, ns=(100, 400, 1600, 6400)):
    return [(n, mean, c / math.sqrt(n)) for n in ns]


class TestResolution:
    def test_closed_form_example(self):
        _, _, sep, req = required_photons(exact_series(0.4, 0.20), exact_series(0.4, 0.25), ks=[2])
        assert sep == pytest.approx(0.05)
        assert req[2][1] == 256

    def test_k_squared_and_separation_scaling(self):
        a, b = exact_series(0.37, 0.20), exact_series(0.41, 0.27)
        _, _, _, req = required_photons(a, b, ks=[1, 2, 3, 4])
        base = req[1][0]
        for k in (2, 3, 4):
            assert req[k][0] == pytest.approx(k * k * base, rel=1e-12)
            assert abs(req[k][1] - k * k * base) <= 1
        _, _, _, half = required_photons(a, exact_series(0.41, 0.20 + 0.035), ks=[1])
        assert half[1][0] == pytest.approx(4 * base, rel=1e-9)

    def test_combine_rules(self):
        a, b = exact_series(0.4, 0.20), exact_series(0.3, 0.25)
        expect = {"max": 0.4, "sum": 0.7, "pooled": 0.5}
        for rule, c in expect.items():
            _, _, _, req = required_photons(a, b, ks=[2], combine=rule)
            assert req[2][0] == pytest.approx((2 * c / 0.05) ** 2, rel=1e-9)
        with pytest.raises(DomainError):
            required_photons(a, b, combine="mean")

    def test_zero_separation(self):
        with pytest.raises(ResolutionUndefinedError):
            required_photons(exact_series(0.4, 0.2), exact_series(0.4, 0.2))

    def test_report_fock_vs_laser(self):
        # precision-formula coefficients: sqrt(alpha (1 - alpha)) and sqrt(1 - alpha)
        def modes(alpha):
            return {"fock": exact_series(math.sqrt(alpha * (1 - alpha)), alpha),
                    "coherent": exact_series(math.sqrt(1 - alpha), alpha)}

        report = resolution_analysis(modes(0.72), modes(0.7375), ks=(2, 3, 4))
        counts = [report.photons_required[k] for k in (2, 3, 4)]
        for row in counts:
            assert row["saved"] == row["coherent"] - row["fock"] > 0
        assert [r["fock"] for r in counts] == sorted(r["fock"] for r in counts)
        exact = report.exact_required[2]
        # max-of-fits picks sample A (alpha 0.72) for both modes
        assert exact["fock"] / exact["coherent"] == pytest.approx(0.72, rel=1e-12)
        assert report.separation["fock"] == pytest.approx(0.0175)

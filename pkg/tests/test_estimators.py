import numpy as np
import pytest
from sklearn.base import clone
from sklearn.pipeline import make_pipeline

from heraldspec.engine import ExperimentConfig, run_ensemble
from heraldspec.errors import DomainError, FitError, InsufficientDataError
from heraldspec.estimators import (
    AbsorbanceTransformer,
    HeraldedLossEstimator,
    PrecisionScalingRegressor,
    SystemLossCalibrator,
)
from heraldspec.samples import FlatProfile
from heraldspec.source import SourceConfig


@pytest.fixture(scope="module")
def ensemble():
    cfg = ExperimentConfig(source=SourceConfig(pair_rate=1000 / 0.35), sample=FlatProfile(0.3),
                           trials=500, temperature=100.0)
    return run_ensemble(cfg)


class TestHeraldedLossEstimator:
    def test_matches_engine(self, ensemble):
        est = HeraldedLossEstimator().fit(ensemble.counts)
        assert est.stats_ == ensemble
        assert est.alpha_ == ensemble.mean
        np.testing.assert_array_equal(est.transform(ensemble.counts), ensemble.estimates)

    def test_params_and_clone(self):
        est = HeraldedLossEstimator(herald_arm="b", batch_size=50)
        assert est.get_params() == {"herald_arm": "b", "batch_size": 50}
        twin = clone(est)
        assert twin is not est and twin.get_params() == est.get_params()
        assert est.set_params(batch_size=20).batch_size == 20

    def test_zero_heralds(self):
        X = np.array([[0, 5, 0], [10, 8, 6], [20, 15, 12]])
        est = HeraldedLossEstimator().fit(X)
        assert est.n_excluded_ == 1
        assert est.alpha_ == pytest.approx(0.4)
        with pytest.raises(InsufficientDataError):
            est.transform(X)

    def test_bad_input(self):
        with pytest.raises(ValueError):
            HeraldedLossEstimator().fit(np.ones((3, 2)))
        with pytest.raises(ValueError):
            HeraldedLossEstimator(herald_arm="c").fit(np.ones((3, 3)))

    def test_advantage(self, ensemble):
        report = HeraldedLossEstimator.from_stats(ensemble).advantage()
        assert report.n_batches == 5


class TestTransformers:
    def test_calibrator(self):
        cal = SystemLossCalibrator().fit([0.6, 0.6, 0.6])
        assert cal.transform([0.72])[0] == pytest.approx(0.3, abs=1e-12)
        assert cal.inverse_transform([0.3])[0] == pytest.approx(0.72, abs=1e-12)
        with pytest.raises(DomainError):
            SystemLossCalibrator().fit([1.0, 1.0])

    def test_absorbance_pipeline(self):
        pipe = make_pipeline(SystemLossCalibrator(), AbsorbanceTransformer())
        pipe.fit(np.full((4, 1), 0.6))
        out = pipe.transform(np.array([[0.6], [0.7]]))
        assert out[0] == pytest.approx(0.0, abs=1e-12)
        assert out[1] == pytest.approx(-np.log(0.3 / 0.4))

    def test_absorbance_clamp_counter(self):
        tr = AbsorbanceTransformer().fit([[0.1]])
        out = tr.transform([1.0, 0.5])
        assert tr.n_clamped_ == 1 and np.all(np.isfinite(out))
        assert tr.inverse_transform(tr.transform([0.25]))[0] == pytest.approx(0.25)
        dec = AbsorbanceTransformer(decadic=True).fit([[0.1]])
        assert dec.inverse_transform(dec.transform([0.25]))[0] == pytest.approx(0.25)


class TestPrecisionScalingRegressor:
    def test_fit_predict(self):
        n = np.array([100.0, 1000.0, 10_000.0])
        reg = PrecisionScalingRegressor().fit(n.reshape(-1, 1), 0.5 / np.sqrt(n))
        assert reg.coef_ == pytest.approx(0.5, abs=1e-12)
        np.testing.assert_allclose(reg.predict([[400.0]]), [0.025])
        assert reg.photons_for(0.005) == pytest.approx(10_000)
        assert reg.score(n.reshape(-1, 1), 0.5 / np.sqrt(n)) == pytest.approx(1.0)

    def test_degenerate(self):
        with pytest.raises(FitError):
            PrecisionScalingRegressor().fit([[5.0]] * 3, [0.1, 0.1, 0.1])
        with pytest.raises(DomainError):
            PrecisionScalingRegressor().fit([[1.0], [4.0], [9.0]], [1, 0.5, 0.3]).photons_for(0)

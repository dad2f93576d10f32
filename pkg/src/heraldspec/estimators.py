"""scikit-learn compatible wrappers around the estimators in this package.

These let the heralded estimator, the system-loss calibration, the
absorbance conversion and the precision-scaling fit take part in
pipelines, ``clone`` and ``get_params``/``set_params`` like any other
estimator.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .analysis import ABSORBANCE_CEILING, fit_precision_scaling, quantum_advantage
from .engine import EnsembleStats, _aggregate
from .errors import DomainError, InsufficientDataError

__all__ = [
    "HeraldedLossEstimator",
    "SystemLossCalibrator",
    "AbsorbanceTransformer",
    "PrecisionScalingRegressor",
]


def _column(X, name="X"):
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D or a single column, got shape {arr.shape}")
    return check_array(arr.reshape(-1, 1), ensure_all_finite=True)[:, 0]


class HeraldedLossEstimator(BaseEstimator):
    """Heralded loss estimate from per-trial counts.

    Parameters
    ----------
    herald_arm : {"a", "b"}, default="a"
        Arm whose singles count forms the denominator.
    batch_size : int, default=100
        Batch size used by :meth:`advantage`.

    ``X`` has columns ``(n_a, n_b, n_ab)``.  Trials without herald
    detections are excluded from the fit and counted in ``n_excluded_``.
    """

    def __init__(self, herald_arm="a", batch_size=100):
        self.herald_arm = herald_arm
        self.batch_size = batch_size

    def _herald(self, X):
        if self.herald_arm not in ("a", "b"):
            raise ValueError("herald_arm must be 'a' or 'b'")
        X = check_array(X, dtype=np.int64)
        if X.shape[1] != 3:
            raise ValueError("X must have columns (n_a, n_b, n_ab)")
        if np.any(X < 0):
            raise ValueError("counts must be non-negative")
        return X, X[:, 0 if self.herald_arm == "a" else 1]

    def fit(self, X, y=None):
        X, herald = self._herald(X)
        ok = herald > 0
        estimates = 1.0 - X[ok, 2] / herald[ok]
        self.stats_ = _aggregate(estimates, herald[ok].astype(float), X,
                                 X[:, 0].sum() + X[:, 1].sum(), (~ok).sum())
        self.alpha_ = self.stats_.mean
        self.variance_ = self.stats_.variance
        self.stderr_ = self.stats_.stderr_of_mean
        self.nbar_ = self.stats_.mean_herald_counts
        self.n_excluded_ = self.stats_.n_excluded
        self.n_features_in_ = 3
        return self

    def transform(self, X):
        """Per-trial estimates ``1 - n_ab / n_herald``."""
        X, herald = self._herald(X)
        if np.any(herald == 0):
            raise InsufficientDataError(
                f"{int(np.count_nonzero(herald == 0))} trial(s) have no herald detections"
            )
        return 1.0 - X[:, 2] / herald

    def fit_transform(self, X, y=None):
        return self.fit(X).transform(X)

    def advantage(self, baseline_alpha=None):
        check_is_fitted(self, "stats_")
        return quantum_advantage(self.stats_, baseline_alpha, self.batch_size)

    @classmethod
    def from_stats(cls, stats: EnsembleStats, herald_arm="a", batch_size=100):
        return cls(herald_arm, batch_size).fit(stats.counts)


class SystemLossCalibrator(TransformerMixin, BaseEstimator):
    """Divide a separately measured system loss out of total-loss estimates.

    ``fit`` takes estimates recorded with the sample removed; ``transform``
    maps total-loss estimates to sample-only loss.  Results are not clamped.
    """

    def fit(self, X, y=None):
        system = _column(X)
        self.alpha_system_ = float(np.mean(system))
        if self.alpha_system_ >= 1.0:
            raise DomainError("system loss of 1 cannot be divided out")
        self.stderr_ = float(np.std(system, ddof=1) / math.sqrt(system.size)) if system.size > 1 else 0.0
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "alpha_system_")
        total = _column(X)
        return 1.0 - (1.0 - total) / (1.0 - self.alpha_system_)

    def inverse_transform(self, X):
        check_is_fitted(self, "alpha_system_")
        sample = _column(X)
        return 1.0 - (1.0 - sample) * (1.0 - self.alpha_system_)


class AbsorbanceTransformer(TransformerMixin, BaseEstimator):
    """Sample absorption to absorbance, ``-ln(1 - alpha2)``.

    Values above ``1 - 1e-9`` are clamped; the number clamped by the last
    ``transform`` call is kept in ``n_clamped_``.
    """

    def __init__(self, decadic=False):
        self.decadic = decadic

    def fit(self, X, y=None):
        _column(X)
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        alpha2 = _column(X)
        clamp = alpha2 > ABSORBANCE_CEILING
        self.n_clamped_ = int(np.count_nonzero(clamp))
        out = -np.log1p(-np.minimum(alpha2, ABSORBANCE_CEILING))
        return out / math.log(10.0) if self.decadic else out

    def inverse_transform(self, X):
        absorbance = _column(X)
        if self.decadic:
            absorbance = absorbance * math.log(10.0)
        return -np.expm1(-absorbance)


class PrecisionScalingRegressor(RegressorMixin, BaseEstimator):
    """``delta_alpha = c / sqrt(N)`` regression on photon number ``N``.

    After fitting, ``coef_`` holds ``c`` and ``residual_rms_`` the log-space
    residual RMS.
    """

    def fit(self, X, y):
        n = _column(X)
        delta = _column(y, "y")
        if n.size != delta.size:
            raise ValueError("X and y have different lengths")
        fit = fit_precision_scaling(np.column_stack([n, delta]))
        self.coef_ = fit.coefficient
        self.residual_rms_ = fit.residual_rms
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        return self.coef_ / np.sqrt(_column(X))

    def photons_for(self, target_delta):
        """Photon number at which the fitted error drops to ``target_delta``."""
        check_is_fitted(self, "coef_")
        if not target_delta > 0:
            raise DomainError("target_delta must be positive")
        return (self.coef_ / target_delta) ** 2

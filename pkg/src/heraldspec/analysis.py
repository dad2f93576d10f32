"""Post-processing of simulated ensembles.

Quantum advantage per batch of trials, absorbance spectra, the ``c/sqrt(N)``
precision-scaling fit and the photon budget needed to tell two samples
apart.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .engine import EnsembleStats
from .errors import DomainError, FitError, ResolutionUndefinedError

__all__ = [
    "ABSORBANCE_CEILING",
    "AbsorbanceClampWarning",
    "AdvantageReport",
    "AbsorbanceSpectrum",
    "ScalingFit",
    "ResolutionReport",
    "quantum_advantage",
    "absorbance_spectrum",
    "fit_precision_scaling",
    "required_photons",
    "resolution_analysis",
    "scaling_series",
]

ABSORBANCE_CEILING = 1.0 - 1e-9


class AbsorbanceClampWarning(UserWarning):
    pass


@dataclass
class AdvantageReport:
    """Batch-wise variance reduction relative to the shot-noise limit.

    ``per_batch_advantage`` holds fractions; the summary fields are in
    percent.  With a single batch the standard error is undefined: it is
    reported as NaN and ``stderr_defined`` is False.
    """

    per_batch_advantage: np.ndarray
    mean_advantage_percent: float
    stderr_percent: float
    theoretical_max_percent: float
    batch_size: int
    stderr_defined: bool = True

    @property
    def n_batches(self) -> int:
        return int(self.per_batch_advantage.size)

    def exceeds_bound(self, n_sigma: float = 3.0) -> bool:
        """True if the measured advantage is significantly above the ideal bound."""
        if not self.stderr_defined:
            return self.mean_advantage_percent > self.theoretical_max_percent
        return self.mean_advantage_percent > self.theoretical_max_percent + n_sigma * self.stderr_percent


def _batch_advantage(variance, snl_variance):
    if snl_variance > 0:
        return 1.0 - variance / snl_variance
    # both vanish at total absorption: ratio 1 by convention
    if variance == 0:
        return 0.0
    return -math.inf


def quantum_advantage(fock: EnsembleStats, baseline_alpha: float | None = None,
                      batch_size: int = 100, baseline: EnsembleStats | None = None) -> AdvantageReport:
    """Split the estimates into consecutive batches and compare each to the SNL.

    Per batch the shot-noise variance is ``(1 - alpha) / nbar`` with
    ``alpha`` the batch mean estimate (or ``baseline_alpha`` when given) and
    ``nbar`` the batch mean herald count.  Passing a simulated ``baseline``
    ensemble replaces the analytic SNL by that ensemble's batch variances.
    Trailing trials that do not fill a batch are ignored.
    """
    if batch_size < 2:
        raise DomainError("batch_size must be at least 2")
    n_batches = fock.estimates.size // batch_size
    if n_batches < 1:
        raise DomainError(
            f"{fock.estimates.size} estimates cannot fill one batch of {batch_size}"
        )
    if baseline is not None and baseline.estimates.size // batch_size < n_batches:
        raise DomainError("baseline ensemble has fewer batches than the heralded ensemble")

    advantages = np.empty(n_batches)
    for b in range(n_batches):
        sl = slice(b * batch_size, (b + 1) * batch_size)
        est = fock.estimates[sl]
        variance = float(np.var(est, ddof=1))
        if baseline is not None:
            snl = float(np.var(baseline.estimates[sl], ddof=1))
        else:
            alpha = float(np.mean(est)) if baseline_alpha is None else baseline_alpha
            snl = max(1.0 - alpha, 0.0) / float(np.mean(fock.herald_counts[sl]))
        advantages[b] = _batch_advantage(variance, snl)

    mean = float(np.mean(advantages)) * 100.0
    if n_batches >= 2:
        stderr = float(np.std(advantages, ddof=1)) / math.sqrt(n_batches) * 100.0
        defined = True
    else:
        stderr, defined = math.nan, False
    return AdvantageReport(
        per_batch_advantage=advantages,
        mean_advantage_percent=mean,
        stderr_percent=stderr,
        theoretical_max_percent=(1.0 - fock.mean) * 100.0,
        batch_size=batch_size,
        stderr_defined=defined,
    )


@dataclass
class AbsorbanceSpectrum:
    wavelengths: np.ndarray
    absorbance: np.ndarray
    n_clamped: int = 0

    def __iter__(self):
        return iter(zip(self.wavelengths.tolist(), self.absorbance.tolist()))

    def __len__(self):
        return int(self.wavelengths.size)


def absorbance_spectrum(spectrum, decadic: bool = False) -> AbsorbanceSpectrum:
    """Pointwise ``A = -ln(1 - alpha2)`` over ``(wavelength, alpha2)`` rows.

    ``alpha2`` at or above :data:`ABSORBANCE_CEILING` is clamped to it and
    counted.  Slightly negative ``alpha2`` from noise passes through as a
    slightly negative absorbance.  ``decadic=True`` divides by ``ln 10``.
    """
    rows = list(spectrum)
    lam = np.array([r[0] for r in rows], dtype=float)
    alpha2 = np.array([r[1] for r in rows], dtype=float)
    if np.any(~np.isfinite(alpha2)):
        raise DomainError("alpha2 values must be finite")
    clamp = alpha2 > ABSORBANCE_CEILING
    n_clamped = int(np.count_nonzero(clamp))
    if n_clamped:
        warnings.warn(f"{n_clamped} alpha2 value(s) clamped to {ABSORBANCE_CEILING!r}",
                      AbsorbanceClampWarning, stacklevel=2)
    absorbance = -np.log1p(-np.minimum(alpha2, ABSORBANCE_CEILING))
    if decadic:
        absorbance = absorbance / math.log(10.0)
    return AbsorbanceSpectrum(lam, absorbance, n_clamped)


class ScalingFit(NamedTuple):
    coefficient: float
    residual_rms: float

    def predict(self, n_total):
        return self.coefficient / np.sqrt(np.asarray(n_total, dtype=float))


def fit_precision_scaling(points) -> ScalingFit:
    """Fit ``delta_alpha = c / sqrt(N)`` to ``(N, delta_alpha)`` points.

    The fit is least squares in log space with the slope fixed at -1/2, so
    ``ln c`` is the mean of ``ln delta_alpha + ln(N) / 2``.  The residual RMS
    is in log units.
    """
    arr = np.asarray(list(points), dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 3:
        raise FitError("need at least 3 (N, delta_alpha) points")
    n, delta = arr[:, 0], arr[:, 1]
    if np.any(~np.isfinite(arr)) or np.any(n <= 0) or np.any(delta <= 0):
        raise FitError("N and delta_alpha must be finite and positive")
    if np.all(n == n[0]):
        raise FitError("all points share the same N; the scaling is unconstrained")
    log_c = np.log(delta) + 0.5 * np.log(n)
    coefficient = float(math.exp(np.mean(log_c)))
    residual = log_c - np.mean(log_c)
    return ScalingFit(coefficient, float(np.sqrt(np.mean(residual**2))))


def scaling_series(ensembles) -> list[tuple[float, float, float]]:
    """``(N, mean, delta_alpha)`` rows from a sequence of ensembles.

    ``N`` is the mean number of probe photons sent per estimate (herald
    count, or the laser's input intensity for the coherent comparator).
    """
    return [(e.mean_herald_counts, e.mean, e.std) for e in ensembles]


_COMBINE = {
    "max": lambda a, b: max(a, b),
    "sum": lambda a, b: a + b,
    "pooled": lambda a, b: math.hypot(a, b),
}


@dataclass
class ResolutionReport:
    """Photons needed to separate two samples by ``k`` standard deviations.

    ``photons_required[k]`` maps ``fock``, ``coherent`` and ``saved`` to
    integer photon counts; ``exact_required[k]`` keeps the unrounded values.
    """

    coefficients: dict
    separation: dict
    photons_required: dict
    exact_required: dict = field(default_factory=dict)
    combine: str = "max"


def required_photons(series_a, series_b, ks=(2, 3, 4), combine: str = "max"):
    """Fit both series and return ``(c_a, c_b, separation, {k: (N_exact, N)})``.

    ``N`` is the smallest photon count with
    ``|mean_a - mean_b| >= k * c / sqrt(N)``, where ``c`` combines the two
    fitted coefficients according to ``combine``.
    """
    if combine not in _COMBINE:
        raise DomainError(f"combine must be one of {sorted(_COMBINE)}")
    series_a, series_b = list(series_a), list(series_b)
    if not series_a or not series_b:
        raise DomainError("both series must be non-empty")
    fit_a = fit_precision_scaling([(n, d) for n, _, d in series_a])
    fit_b = fit_precision_scaling([(n, d) for n, _, d in series_b])
    mean_a = float(np.mean([m for _, m, _ in series_a]))
    mean_b = float(np.mean([m for _, m, _ in series_b]))
    separation = abs(mean_a - mean_b)
    if separation == 0.0:
        raise ResolutionUndefinedError("the two samples have identical mean absorption")
    c = _COMBINE[combine](fit_a.coefficient, fit_b.coefficient)
    out = {}
    for k in ks:
        exact = (k * c / separation) ** 2
        # rounding noise just above an integer must not cost a whole photon
        out[k] = (exact, int(math.ceil(exact * (1.0 - 1e-12))))
    return fit_a.coefficient, fit_b.coefficient, separation, out


def resolution_analysis(stats_a: dict, stats_b: dict, ks=(2, 3, 4),
                        combine: str = "max") -> ResolutionReport:
    """Compare heralded and laser photon budgets for resolving two samples.

    ``stats_a`` and ``stats_b`` map ``"fock"`` and ``"coherent"`` to
    ``(N, mean, delta_alpha)`` series for that sample.
    """
    ks = list(ks)
    coefficients, separation, per_mode = {}, {}, {}
    for mode in ("fock", "coherent"):
        c_a, c_b, sep, req = required_photons(stats_a[mode], stats_b[mode], ks, combine)
        coefficients[mode] = (c_a, c_b)
        separation[mode] = sep
        per_mode[mode] = req
    photons, exact = {}, {}
    for k in ks:
        n_fock = per_mode["fock"][k][1]
        n_coh = per_mode["coherent"][k][1]
        photons[k] = {"fock": n_fock, "coherent": n_coh, "saved": n_coh - n_fock}
        exact[k] = {"fock": per_mode["fock"][k][0], "coherent": per_mode["coherent"][k][0]}
    return ResolutionReport(coefficients, separation, photons, exact, combine)

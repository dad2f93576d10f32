"""Photon statistics under loss and the precision limits they imply.

Two probe families are compared throughout the package:

* an ideal laser (coherent state), whose detected photon number is Poisson
  distributed both before and after loss, and
* a Fock state ``|N>`` (in practice a heralded single photon, ``N = 1`` per
  herald), whose detected photon number after loss is binomial.

All functions here are pure and operate on plain floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, SaturationError

__all__ = [
    "LossBudget",
    "PrecisionPoint",
    "BeerLambertParams",
    "compose_losses",
    "extract_sample_loss",
    "snl_precision",
    "fock_precision",
    "ideal_advantage",
    "binomial_output_pmf",
    "poisson_output_pmf",
    "absorbance_from_alpha",
    "alpha_from_absorbance",
    "beer_lambert_absorbance",
    "photons_required",
]


def _check_fraction(name, value):
    if not (0.0 <= value <= 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class LossBudget:
    """Loss before the sample, absorption by the sample, loss after it."""

    alpha1: float = 0.0
    alpha2: float = 0.0
    alpha3: float = 0.0

    def __post_init__(self):
        for name in ("alpha1", "alpha2", "alpha3"):
            _check_fraction(name, getattr(self, name))

    @property
    def total(self) -> float:
        return compose_losses(self)

    @property
    def system(self) -> float:
        """Loss with the sample removed."""
        return compose_losses(LossBudget(self.alpha1, 0.0, self.alpha3))


@dataclass(frozen=True)
class PrecisionPoint:
    alpha: float
    nu: int
    nbar: float
    delta_alpha: float

    @property
    def variance(self) -> float:
        return self.delta_alpha**2

    @property
    def fisher_per_photon(self) -> float:
        """``nu / delta_alpha**2``; infinite where the variance vanishes."""
        if self.delta_alpha == 0.0:
            return math.inf
        return self.nu / self.delta_alpha**2


@dataclass(frozen=True)
class BeerLambertParams:
    """Napierian molar absorption coefficient, concentration and path length.

    Units: ``epsilon`` in L/(mol cm), ``c`` in mol/L, ``l`` in cm.
    """

    epsilon: float
    c: float
    l: float  # noqa: E741

    def __post_init__(self):
        for name in ("epsilon", "c", "l"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be non-negative")

    @property
    def absorbance(self) -> float:
        return beer_lambert_absorbance(self)


def compose_losses(budget: LossBudget) -> float:
    """Total loss of three stages in series: ``1 - prod(1 - alpha_i)``."""
    return 1.0 - (1.0 - budget.alpha1) * (1.0 - budget.alpha2) * (1.0 - budget.alpha3)


def extract_sample_loss(alpha_total: float, alpha_system: float) -> float:
    """Divide the calibrated system loss out of a measured total loss.

    The result is not clamped: a noisy ``alpha_total`` below the system
    floor yields a negative sample loss, and it is up to the caller to
    decide what to do with it.
    """
    if alpha_system >= 1.0:
        raise DomainError("alpha_system = 1 leaves no transmitted light to divide out")
    return 1.0 - (1.0 - alpha_total) / (1.0 - alpha_system)


def _check_precision_args(alpha, nu, nbar):
    _check_fraction("alpha", alpha)
    if nu < 1:
        raise DomainError(f"nu must be a positive trial count, got {nu!r}")
    if not nbar > 0:
        raise DomainError(f"nbar must be positive, got {nbar!r}")


def snl_precision(alpha: float, nu: int, nbar: float) -> PrecisionPoint:
    """Shot-noise-limited RMS error for a Poisson probe of mean ``nbar``."""
    _check_precision_args(alpha, nu, nbar)
    delta = math.sqrt((1.0 - alpha) / (nu * nbar))
    return PrecisionPoint(alpha, nu, nbar, delta)


def fock_precision(alpha: float, nu: int, nbar: float) -> PrecisionPoint:
    """RMS error for a Fock probe carrying ``nbar`` photons per trial."""
    _check_precision_args(alpha, nu, nbar)
    delta = math.sqrt(alpha * (1.0 - alpha) / (nu * nbar))
    return PrecisionPoint(alpha, nu, nbar, delta)


def ideal_advantage(alpha: float) -> dict:
    """Variance ratio Fock/laser at equal input intensity, and the advantage.

    The ratio is ``alpha``.  At ``alpha = 1`` both variances vanish and the
    ratio is taken as its limit, 1 (no advantage).  At ``alpha = 0`` only
    the Fock variance vanishes, so the ratio is 0 (100 % advantage).
    """
    _check_fraction("alpha", alpha)
    ratio = float(alpha)
    return {"variance_ratio": ratio, "advantage_percent": (1.0 - ratio) * 100.0}


def _log_or_neg_inf(x):
    return math.log(x) if x > 0.0 else -math.inf


def binomial_output_pmf(n_in: int, n_out: int, alpha: float) -> float:
    """Probability of detecting ``n_out`` of ``n_in`` photons sent through loss ``alpha``."""
    _check_fraction("alpha", alpha)
    if n_in < 0 or n_out < 0:
        raise DomainError("photon numbers must be non-negative")
    if n_out > n_in:
        raise DomainError(f"n_out={n_out} exceeds n_in={n_in}")
    n_lost = n_in - n_out
    # 0**0 = 1 for the degenerate transmissions
    log_t = 0.0 if n_out == 0 else n_out * _log_or_neg_inf(1.0 - alpha)
    log_l = 0.0 if n_lost == 0 else n_lost * _log_or_neg_inf(alpha)
    log_c = math.lgamma(n_in + 1) - math.lgamma(n_out + 1) - math.lgamma(n_lost + 1)
    return math.exp(log_c + log_t + log_l)


def poisson_output_pmf(nbar: float, n_out: int, alpha: float) -> float:
    """Probability of detecting ``n_out`` photons from a laser of mean ``nbar`` after loss."""
    _check_fraction("alpha", alpha)
    if nbar < 0:
        raise DomainError(f"nbar must be non-negative, got {nbar!r}")
    if n_out < 0:
        raise DomainError("n_out must be non-negative")
    mean = nbar * (1.0 - alpha)
    if mean == 0.0:
        return 1.0 if n_out == 0 else 0.0
    return math.exp(n_out * math.log(mean) - mean - math.lgamma(n_out + 1))


def absorbance_from_alpha(alpha2: float) -> float:
    """Napierian absorbance ``-ln(1 - alpha2)`` of a sample absorbing ``alpha2``."""
    if alpha2 < 0.0:
        raise DomainError(f"alpha2 must be non-negative, got {alpha2!r}")
    if alpha2 >= 1.0:
        raise SaturationError("absorbance diverges at alpha2 = 1")
    return -math.log1p(-alpha2)


def alpha_from_absorbance(absorbance: float) -> float:
    if absorbance < 0.0:
        raise DomainError("absorbance must be non-negative")
    return -math.expm1(-absorbance)


def beer_lambert_absorbance(params: BeerLambertParams) -> float:
    return params.epsilon * params.c * params.l


def photons_required(alpha: float, target_delta: float, probe: str) -> float:
    """Total probe photons ``nu * nbar`` needed to reach RMS error ``target_delta``.

    ``probe`` is ``"fock"`` or ``"coherent"``; the Fock value is always
    ``alpha`` times the coherent one.
    """
    _check_fraction("alpha", alpha)
    if not target_delta > 0:
        raise DomainError("target_delta must be positive")
    if probe == "coherent":
        return (1.0 - alpha) / target_delta**2
    if probe == "fock":
        return alpha * (1.0 - alpha) / target_delta**2
    raise DomainError(f"unknown probe {probe!r}; expected 'fock' or 'coherent'")

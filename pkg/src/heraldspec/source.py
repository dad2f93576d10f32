"""Temperature-tuned photon-pair source.

The crystal temperature selects the centre wavelength of the herald-arm
photon through a user-supplied calibration table; the partner wavelength
follows from energy conservation with the pump.  Each photon carries a
Gaussian lineshape of fixed FWHM.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import CalibrationError, ConfigError, ParseError

__all__ = [
    "LAMBDA_A_RANGE",
    "LAMBDA_B_RANGE",
    "FWHM_TO_SIGMA",
    "DEFAULT_CALIBRATION",
    "Lineshape",
    "SourceConfig",
    "partner_wavelength",
    "wavelengths_at_temperature",
    "temperature_for_wavelength",
    "sample_photon_wavelength",
    "validate_source",
    "load_calibration",
]

# accessible tuning ranges of the two arms, nm
LAMBDA_A_RANGE = (773.0, 809.0)
LAMBDA_B_RANGE = (806.0, 845.0)

FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))

# 8 evenly spaced points.  The low end sits at 773.8 nm rather than 773 nm
# because 773 nm would put the partner photon at 845.9 nm, outside arm b.
DEFAULT_CALIBRATION = tuple(
    (float(t), float(lam))
    for t, lam in zip(np.linspace(25.0, 200.0, 8), np.linspace(773.8, 809.0, 8))
)


@dataclass(frozen=True)
class Lineshape:
    """Gaussian spectral density of a single photon."""

    center: float
    fwhm: float

    def __post_init__(self):
        if not self.fwhm > 0:
            raise ValueError(f"lineshape fwhm must be positive, got {self.fwhm!r}")

    @property
    def sigma(self) -> float:
        return self.fwhm * FWHM_TO_SIGMA

    def pdf(self, wavelength):
        z = (np.asarray(wavelength, dtype=float) - self.center) / self.sigma
        return np.exp(-0.5 * z * z) / (self.sigma * math.sqrt(2.0 * math.pi))

    def support(self, width: float = 5.0) -> tuple[float, float]:
        return (self.center - width * self.fwhm, self.center + width * self.fwhm)


@dataclass(frozen=True)
class SourceConfig:
    """Photon-pair source settings.

    ``epsilon_gain`` records the small pair amplitude of the low-gain state
    for completeness; the simulation is driven by ``pair_rate`` alone.
    ``calibration`` maps crystal temperature (degC) to herald-arm centre
    wavelength (nm).
    """

    pair_rate: float = 3000.0
    pump_wavelength: float = 403.9
    pump_linewidth_fwhm: float = 0.057
    epsilon_gain: float = 0.05
    eta_a: float = 0.35
    eta_b: float = 0.29
    lineshape_a_fwhm: float = 0.5
    lineshape_b_fwhm: float = 0.7
    calibration: tuple = field(default=DEFAULT_CALIBRATION)

    def __post_init__(self):
        object.__setattr__(
            self, "calibration", tuple((float(t), float(lam)) for t, lam in self.calibration)
        )

    def validated(self) -> "SourceConfig":
        problems = validate_source(self)
        if problems:
            raise ConfigError(problems)
        return self

    def with_options(self, **changes) -> "SourceConfig":
        return replace(self, **changes)

    def efficiency(self, arm: str) -> float:
        return {"a": self.eta_a, "b": self.eta_b}[arm]

    def lineshape(self, arm: str, center: float) -> Lineshape:
        fwhm = {"a": self.lineshape_a_fwhm, "b": self.lineshape_b_fwhm}[arm]
        return Lineshape(center, fwhm)

    @property
    def temperature_range(self) -> tuple[float, float]:
        temps = [t for t, _ in self.calibration]
        return (min(temps), max(temps))


def partner_wavelength(pump_wavelength: float, wavelength: float) -> float:
    """Wavelength of the other photon of a pair, by energy conservation."""
    inv = 1.0 / pump_wavelength - 1.0 / wavelength
    if inv <= 0:
        raise CalibrationError(
            f"{wavelength} nm is not longer than the pump at {pump_wavelength} nm"
        )
    return 1.0 / inv


def _in_range(value, bounds):
    return bounds[0] <= value <= bounds[1]


def wavelengths_at_temperature(cfg: SourceConfig, temp: float) -> tuple[float, float]:
    """Centre wavelengths ``(lambda_a, lambda_b)`` at crystal temperature ``temp``."""
    temps = np.array([t for t, _ in cfg.calibration])
    lams = np.array([lam for _, lam in cfg.calibration])
    if temps.size == 0:
        raise CalibrationError("calibration table is empty")
    if not (temps[0] <= temp <= temps[-1]):
        raise CalibrationError(
            f"temperature {temp} degC outside calibration range [{temps[0]}, {temps[-1]}]"
        )
    lambda_a = float(np.interp(temp, temps, lams))
    lambda_b = partner_wavelength(cfg.pump_wavelength, lambda_a)
    if not _in_range(lambda_b, LAMBDA_B_RANGE):
        raise CalibrationError(
            f"derived lambda_b = {lambda_b:.3f} nm outside "
            f"[{LAMBDA_B_RANGE[0]:g}, {LAMBDA_B_RANGE[1]:g}] nm"
        )
    return lambda_a, lambda_b


def temperature_for_wavelength(cfg: SourceConfig, wavelength: float, arm: str = "b") -> float:
    """Invert the calibration: temperature that puts ``arm`` at ``wavelength``."""
    lambda_a = wavelength if arm == "a" else partner_wavelength(cfg.pump_wavelength, wavelength)
    temps = np.array([t for t, _ in cfg.calibration])
    lams = np.array([lam for _, lam in cfg.calibration])
    order = np.argsort(lams)
    lams, temps = lams[order], temps[order]
    if not (lams[0] <= lambda_a <= lams[-1]):
        raise CalibrationError(
            f"lambda_a = {lambda_a:.3f} nm is not reachable with the calibration table"
        )
    return float(np.interp(lambda_a, lams, temps))


def sample_photon_wavelength(shape: Lineshape, rng: np.random.Generator, size=None):
    """Draw photon wavelength(s) from a Gaussian lineshape."""
    return rng.normal(shape.center, shape.sigma, size)


def validate_source(cfg: SourceConfig) -> list[str]:
    """Every violated source invariant, as human-readable strings.

    An empty list means the configuration is valid.
    """
    problems = []
    for name in ("eta_a", "eta_b"):
        value = getattr(cfg, name)
        if not (0.0 < value <= 1.0):
            problems.append(f"{name} = {value} must lie in (0, 1]")
    if not cfg.pair_rate > 0:
        problems.append(f"pair_rate = {cfg.pair_rate} must be positive")
    if not (0.0 < cfg.epsilon_gain <= 0.2):
        problems.append(f"epsilon_gain = {cfg.epsilon_gain} must lie in (0, 0.2]")
    for name in ("lineshape_a_fwhm", "lineshape_b_fwhm", "pump_linewidth_fwhm", "pump_wavelength"):
        if not getattr(cfg, name) > 0:
            problems.append(f"{name} must be positive")

    table = cfg.calibration
    if len(table) < 2:
        problems.append("calibration table needs at least 2 rows")
    temps = [t for t, _ in table]
    lams = [lam for _, lam in table]
    if any(b <= a for a, b in zip(temps, temps[1:])):
        problems.append("calibration temperatures must be strictly increasing")
    steps = [b - a for a, b in zip(lams, lams[1:])]
    if steps and not (all(s > 0 for s in steps) or all(s < 0 for s in steps)):
        problems.append("calibrated lambda_a must be strictly monotone in temperature")
    lo_a, hi_a = LAMBDA_A_RANGE
    lo_b, hi_b = LAMBDA_B_RANGE
    for temp, lam in table:
        if not _in_range(lam, LAMBDA_A_RANGE):
            problems.append(
                f"calibration at {temp:g} degC: lambda_a = {lam:g} nm outside [{lo_a:g}, {hi_a:g}] nm"
            )
            continue
        try:
            lam_b = partner_wavelength(cfg.pump_wavelength, lam)
        except CalibrationError as exc:
            problems.append(f"calibration at {temp:g} degC: {exc}")
            continue
        if not _in_range(lam_b, LAMBDA_B_RANGE):
            problems.append(
                f"calibration at {temp:g} degC: derived lambda_b = {lam_b:.3f} nm "
                f"outside [{lo_b:g}, {hi_b:g}] nm"
            )
    return problems


def load_calibration(path) -> tuple:
    """Read a ``temperature lambda_a`` table; ``#`` starts a comment."""
    path = Path(path)
    rows = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            parts = text.replace(",", " ").split()
            if len(parts) != 2:
                raise ParseError(f"expected 2 columns, got {len(parts)}", path, lineno)
            try:
                temp, lam = float(parts[0]), float(parts[1])
            except ValueError:
                raise ParseError(f"non-numeric value in {text!r}", path, lineno) from None
            if not (math.isfinite(temp) and math.isfinite(lam)):
                raise ParseError("non-finite value", path, lineno)
            rows.append((temp, lam))
    if not rows:
        raise ParseError("no calibration rows", path)
    return tuple(rows)

"""Absorption profiles of simulated samples.

A profile gives the sample absorption ``alpha(lambda)`` in [0, 1].  A
photon with a finite bandwidth sees the profile averaged over its
lineshape, see :func:`effective_alpha`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, ParseError
from .source import Lineshape

__all__ = [
    "SpectralProfile",
    "GaussianBandpass",
    "FlatProfile",
    "TabulatedProfile",
    "alpha_at",
    "effective_alpha",
    "load_tabulated",
    "profile_from_dict",
    "HBO2_LIKE",
    "HBCO_LIKE",
]

_FOUR_LN2 = 4.0 * math.log(2.0)
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)
_SUPPORT_FWHM = 5.0


class SpectralProfile:
    """Base class; subclasses implement :meth:`alpha`."""

    kind: str = ""
    #: True when alpha does not depend on wavelength
    wavelength_independent: bool = False

    @property
    def domain(self) -> tuple[float, float]:
        return (-math.inf, math.inf)

    def alpha(self, wavelength):
        raise NotImplementedError

    def breakpoints(self, lo, hi) -> list[float]:
        """Wavelengths strictly inside ``(lo, hi)`` where alpha is not smooth."""
        return []

    def to_dict(self) -> dict:
        raise NotImplementedError

    def _check_domain(self, wavelength):
        lo, hi = self.domain
        w = np.asarray(wavelength, dtype=float)
        if np.any(w < lo) or np.any(w > hi):
            raise DomainError(
                f"wavelength outside the {self.kind} profile domain [{lo:g}, {hi:g}] nm"
            )


@dataclass(frozen=True)
class GaussianBandpass(SpectralProfile):
    """Bandpass filter with a Gaussian transmission curve.

    Absorption is ``1 - peak_transmission * exp(-4 ln2 (lambda - center)^2 / fwhm^2)``.
    """

    center: float
    fwhm: float
    peak_transmission: float = 1.0

    kind = "gaussian_bandpass"

    def __post_init__(self):
        if not self.fwhm > 0:
            raise DomainError("bandpass fwhm must be positive")
        if not (0.0 < self.peak_transmission <= 1.0):
            raise DomainError("peak_transmission must lie in (0, 1]")

    def transmission(self, wavelength):
        d = np.asarray(wavelength, dtype=float) - self.center
        return self.peak_transmission * np.exp(-_FOUR_LN2 * d * d / (self.fwhm * self.fwhm))

    def alpha(self, wavelength):
        return 1.0 - self.transmission(wavelength)

    def to_dict(self):
        return {
            "kind": self.kind,
            "center": self.center,
            "fwhm": self.fwhm,
            "peak_transmission": self.peak_transmission,
        }


@dataclass(frozen=True)
class FlatProfile(SpectralProfile):
    """Constant absorption, optionally with a linear slope about ``reference``."""

    alpha0: float
    slope: float = 0.0
    reference: float = 800.0

    kind = "flat"

    def __post_init__(self):
        if not (0.0 <= self.alpha0 <= 1.0):
            raise DomainError("flat profile alpha must lie in [0, 1]")

    @property
    def wavelength_independent(self):
        return self.slope == 0.0

    def alpha(self, wavelength):
        w = np.asarray(wavelength, dtype=float)
        value = self.alpha0 + self.slope * (w - self.reference)
        if np.any(value < 0.0) or np.any(value > 1.0):
            raise DomainError("sloped flat profile leaves [0, 1] at the requested wavelength")
        if value.ndim == 0:
            return float(value)
        return value

    def to_dict(self):
        return {"kind": self.kind, "alpha": self.alpha0, "slope": self.slope,
                "reference": self.reference}


@dataclass(frozen=True, eq=False)
class TabulatedProfile(SpectralProfile):
    """Linearly interpolated ``(wavelength_nm, alpha)`` table."""

    wavelengths: np.ndarray
    alphas: np.ndarray

    kind = "tabulated"

    def __post_init__(self):
        w = np.asarray(self.wavelengths, dtype=float)
        a = np.asarray(self.alphas, dtype=float)
        if w.ndim != 1 or w.shape != a.shape or w.size == 0:
            raise DomainError("tabulated profile needs matching 1-D wavelength and alpha arrays")
        if np.any(np.diff(w) <= 0):
            raise DomainError("tabulated wavelengths must be strictly increasing")
        if np.any(a < 0) or np.any(a > 1):
            raise DomainError("tabulated alpha values must lie in [0, 1]")
        object.__setattr__(self, "wavelengths", w)
        object.__setattr__(self, "alphas", a)

    def __eq__(self, other):
        return (
            isinstance(other, TabulatedProfile)
            and np.array_equal(self.wavelengths, other.wavelengths)
            and np.array_equal(self.alphas, other.alphas)
        )

    __hash__ = None

    @property
    def domain(self):
        return (float(self.wavelengths[0]), float(self.wavelengths[-1]))

    def breakpoints(self, lo, hi):
        w = self.wavelengths
        return w[(w > lo) & (w < hi)].tolist()

    def alpha(self, wavelength):
        self._check_domain(wavelength)
        out = np.interp(wavelength, self.wavelengths, self.alphas)
        return float(out) if np.ndim(out) == 0 else out

    def to_dict(self):
        return {"kind": self.kind, "rows": [[float(w), float(a)]
                                            for w, a in zip(self.wavelengths, self.alphas)]}


# Illustrative stand-ins for the two haemoglobin samples; not measured values.
HBO2_LIKE = FlatProfile(0.20)
HBCO_LIKE = FlatProfile(0.25)


def alpha_at(profile: SpectralProfile, wavelength: float) -> float:
    value = profile.alpha(wavelength)
    return float(value) if np.ndim(value) == 0 else value


def effective_alpha(profile: SpectralProfile, shape: Lineshape) -> float:
    """Absorption averaged over a photon lineshape.

    Integrates ``alpha(lambda) g(lambda)`` with 64-node Gauss-Legendre
    quadrature over ``center +/- 5 fwhm``, split at any kinks of the profile
    (table rows of a tabulated profile).  The result is divided by the
    quadrature of ``g`` itself so a constant profile is reproduced exactly.
    """
    if profile.wavelength_independent:
        return alpha_at(profile, shape.center)
    lo, hi = shape.support(_SUPPORT_FWHM)
    dlo, dhi = profile.domain
    if lo < dlo or hi > dhi:
        raise DomainError(
            f"lineshape support [{lo:g}, {hi:g}] nm exceeds profile domain [{dlo:g}, {dhi:g}] nm"
        )
    edges = [lo, *profile.breakpoints(lo, hi), hi]
    num = den = 0.0
    for a, b in zip(edges, edges[1:]):
        half = 0.5 * (b - a)
        nodes = 0.5 * (a + b) + half * _GL_NODES
        g = shape.pdf(nodes) * _GL_WEIGHTS * half
        num += float(np.dot(profile.alpha(nodes), g))
        den += float(g.sum())
    return num / den


def load_tabulated(path) -> TabulatedProfile:
    """Read ``lambda_nm alpha`` rows; ``#`` starts a comment.

    Rows may come in any order and are sorted by wavelength.  Duplicate
    wavelengths, malformed rows and alpha outside [0, 1] raise
    :class:`ParseError` naming the offending line.
    """
    path = Path(path)
    rows = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            parts = text.replace(",", " ").split()
            if len(parts) != 2:
                raise ParseError(f"expected 'lambda_nm alpha', got {text!r}", path, lineno)
            try:
                lam, alpha = float(parts[0]), float(parts[1])
            except ValueError:
                raise ParseError(f"non-numeric value in {text!r}", path, lineno) from None
            if not math.isfinite(lam) or not math.isfinite(alpha):
                raise ParseError("non-finite value", path, lineno)
            if not (0.0 <= alpha <= 1.0):
                raise ParseError(f"alpha = {alpha} outside [0, 1]", path, lineno)
            rows.append((lam, alpha, lineno))
    if not rows:
        raise ParseError("no data rows", path)
    rows.sort(key=lambda r: r[0])
    for prev, cur in zip(rows, rows[1:]):
        if cur[0] == prev[0]:
            raise ParseError(f"duplicate wavelength {cur[0]:g} nm", path, cur[2])
    return TabulatedProfile(np.array([r[0] for r in rows]), np.array([r[1] for r in rows]))


def profile_from_dict(mapping: dict, base_dir=None) -> SpectralProfile:
    """Build a profile from a config mapping with a ``kind`` key."""
    mapping = dict(mapping)
    kind = mapping.pop("kind", None)
    if kind == "gaussian_bandpass":
        return GaussianBandpass(float(mapping["center"]), float(mapping["fwhm"]),
                                float(mapping.get("peak_transmission", 1.0)))
    if kind == "flat":
        return FlatProfile(float(mapping["alpha"]), float(mapping.get("slope", 0.0)),
                           float(mapping.get("reference", 800.0)))
    if kind == "tabulated":
        if "file" in mapping:
            path = Path(mapping["file"])
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            return load_tabulated(path)
        rows = np.asarray(mapping["rows"], dtype=float)
        return TabulatedProfile(rows[:, 0], rows[:, 1])
    raise DomainError(f"unknown profile kind {kind!r}")

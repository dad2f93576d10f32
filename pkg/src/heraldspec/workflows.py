"""End-to-end runs behind the command-line tools: theory curves, spectral
scans, single-wavelength advantage and the two-sample resolution sweep.

These return in-memory results; writing files is left to :mod:`heraldspec.cli`.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .analysis import (
    AdvantageReport,
    ResolutionReport,
    absorbance_spectrum,
    quantum_advantage,
    resolution_analysis,
    scaling_series,
)
from .config import RunConfig
from .engine import (
    ROLE_COHERENT,
    ROLE_SAMPLE,
    EnsembleStats,
    ScanPoint,
    run_coherent_ensemble,
    run_ensemble,
    scan_spectrum,
)
from .errors import ConfigError, ResolutionUndefinedError
from .source import temperature_for_wavelength
from .stats import fock_precision, ideal_advantage, snl_precision

__all__ = [
    "theory_rows",
    "ScanResult",
    "run_scan",
    "run_advantage",
    "ResolveResult",
    "run_resolve",
    "sweep_series",
    "ensemble_summary",
]


def theory_rows(alphas, nu: int = 1, nbar: float = 1.0) -> list[tuple]:
    """Rows of ``(alpha, delta_fock, delta_snl, fisher_fock, fisher_snl, advantage_pct)``."""
    rows = []
    for alpha in alphas:
        alpha = float(alpha)
        fock = fock_precision(alpha, nu, nbar)
        snl = snl_precision(alpha, nu, nbar)
        rows.append((alpha, fock.delta_alpha, snl.delta_alpha, fock.fisher_per_photon,
                     snl.fisher_per_photon, ideal_advantage(alpha)["advantage_percent"]))
    return rows


@dataclass
class ScanResult:
    points: list[ScanPoint]
    advantages: list[AdvantageReport]
    rows: list[tuple]
    n_clamped: int


def _scan_temperatures(cfg: RunConfig) -> list[float]:
    exp = cfg.experiment
    if cfg.scan.temperatures is not None:
        return list(cfg.scan.temperatures)
    if cfg.scan.probe_wavelengths is not None:
        return [temperature_for_wavelength(exp.source, lam, exp.sample_arm)
                for lam in cfg.scan.probe_wavelengths]
    if exp.temperature is not None:
        return [exp.temperature]
    return [temperature_for_wavelength(exp.source, exp.lambda_a, "a")]


def _check_batches(cfg: RunConfig, batch_size: int):
    if cfg.experiment.trials < batch_size:
        raise ConfigError(
            f"experiment.trials = {cfg.experiment.trials} is smaller than batch_size = {batch_size}"
        )


def run_scan(cfg: RunConfig, workers: int = 1, baseline: str | None = None,
             decadic: bool = False) -> ScanResult:
    baseline = baseline or cfg.scan.baseline
    batch = cfg.scan.batch_size
    _check_batches(cfg, batch)
    points = scan_spectrum(cfg.experiment, _scan_temperatures(cfg), workers)
    advantages = []
    for p in points:
        coherent = None
        if baseline == "simulated":
            point_cfg = replace(cfg.experiment, temperature=p.temperature, lambda_a=None)
            coherent = run_coherent_ensemble(point_cfg, (ROLE_COHERENT, p.index))
        advantages.append(quantum_advantage(p.stats, batch_size=batch, baseline=coherent))
    spectrum = absorbance_spectrum([(p.wavelength, p.alpha2) for p in points], decadic=decadic)
    rows = [
        (p.wavelength, p.alpha2, p.alpha2_stderr, a_val, adv.mean_advantage_percent,
         adv.stderr_percent if adv.stderr_defined else None, adv.theoretical_max_percent)
        for p, a_val, adv in zip(points, spectrum.absorbance.tolist(), advantages)
    ]
    return ScanResult(points, advantages, rows, spectrum.n_clamped)


def run_advantage(cfg: RunConfig, workers: int = 1, baseline: str | None = None):
    """Heralded ensemble at one wavelength and its batch-wise advantage."""
    baseline = baseline or cfg.advantage.baseline
    _check_batches(cfg, cfg.advantage.batch_size)
    stats = run_ensemble(cfg.experiment, (ROLE_SAMPLE,), workers)
    coherent = run_coherent_ensemble(cfg.experiment) if baseline == "simulated" else None
    report = quantum_advantage(stats, batch_size=cfg.advantage.batch_size, baseline=coherent)
    return stats, report


@dataclass
class ResolveResult:
    report: ResolutionReport
    series: dict  # {("A"|"B", "fock"|"coherent"): [(T, EnsembleStats), ...]}
    scatter_rows: list[tuple]


def _check_compatible(cfg_a: RunConfig, cfg_b: RunConfig):
    a, b = cfg_a.experiment, cfg_b.experiment
    problems = []
    if a.source != b.source:
        problems.append("the two configs must share source settings")
    if a.sample_arm != b.sample_arm:
        problems.append("the two configs must place the sample in the same arm")
    if not problems and abs(a.probe_wavelength - b.probe_wavelength) > 1e-9:
        problems.append(
            f"probe wavelengths differ: {a.probe_wavelength:.4f} nm vs {b.probe_wavelength:.4f} nm"
        )
    if problems:
        raise ConfigError(problems)


def sweep_series(experiment, times, estimates: int, sample_index: int = 0, workers: int = 1):
    """Heralded and laser ensembles of ``estimates`` trials at each integration time."""
    fock, coherent = [], []
    for j, t in enumerate(times):
        exp = replace(experiment, integration_time=t, trials=estimates)
        fock.append((t, run_ensemble(exp, (ROLE_SAMPLE, sample_index, j), workers)))
        coherent.append((t, run_coherent_ensemble(exp, (ROLE_COHERENT, sample_index, j))))
    return fock, coherent


def run_resolve(cfg_a: RunConfig, cfg_b: RunConfig, ks=None, combine: str | None = None,
                workers: int = 1) -> ResolveResult:
    """Sweep integration time for both samples and compute the photon budgets.

    Sweep settings come from the first config.
    """
    _check_compatible(cfg_a, cfg_b)
    # independent streams would otherwise turn pure noise into a finite budget
    if cfg_a.experiment.expected_alpha == cfg_b.experiment.expected_alpha:
        raise ResolutionUndefinedError("the two samples have identical expected absorption")
    opts = cfg_a.resolve
    ks = list(ks or opts.ks)
    combine = combine or opts.combine
    times = opts.integration_times()
    series = {}
    for idx, (label, cfg) in enumerate((("A", cfg_a), ("B", cfg_b))):
        fock, coherent = sweep_series(cfg.experiment, times, opts.estimates, idx, workers)
        series[(label, "fock")] = fock
        series[(label, "coherent")] = coherent

    def rows(label, mode):
        return scaling_series([e for _, e in series[(label, mode)]])

    report = resolution_analysis(
        {"fock": rows("A", "fock"), "coherent": rows("A", "coherent")},
        {"fock": rows("B", "fock"), "coherent": rows("B", "coherent")},
        ks, combine,
    )
    scatter = []
    for (label, mode), entries in series.items():
        for t, e in entries:
            scatter.append((label, mode, t, e.mean_herald_counts, e.mean, e.std))
    return ResolveResult(report, series, scatter)


def ensemble_summary(stats: EnsembleStats) -> dict:
    return {
        "mean": stats.mean,
        "variance": stats.variance,
        "stderr_of_mean": stats.stderr_of_mean,
        "mean_herald_counts": stats.mean_herald_counts,
        "total_detected_photons": stats.total_detected_photons,
        "n_trials": stats.n_trials,
        "n_excluded": stats.n_excluded,
        "estimates_min": float(np.min(stats.estimates)),
        "estimates_max": float(np.max(stats.estimates)),
    }

"""Monte Carlo simulation of the heralded counting experiment.

Each trial is one integration window.  Pairs arrive as a Poisson process;
for every pair the herald photon is detected with the herald-arm
efficiency, and the probe photon, drawn from its lineshape, survives the
sample with probability ``1 - alpha(lambda)`` and is then detected with the
probe-arm efficiency.  The herald arm is always the sample-free arm.

Every trial draws from its own generator seeded from
``(master_seed, *stream, trial_index)``, so results do not depend on how
trials are spread over worker processes.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .errors import CalibrationError, ConfigError, EnsembleError, InsufficientDataError
from .samples import FlatProfile, SpectralProfile, effective_alpha
from .source import (
    LAMBDA_A_RANGE,
    LAMBDA_B_RANGE,
    Lineshape,
    SourceConfig,
    partner_wavelength,
    validate_source,
    wavelengths_at_temperature,
)
from .stats import extract_sample_loss

__all__ = [
    "DEFAULT_SEED",
    "ROLE_SAMPLE",
    "ROLE_CALIBRATION",
    "ROLE_COHERENT",
    "ExperimentConfig",
    "TrialRecord",
    "EnsembleStats",
    "ScanPoint",
    "derive_seed",
    "validate_experiment",
    "run_trial",
    "estimate_alpha",
    "run_ensemble",
    "run_coherent_ensemble",
    "scan_spectrum",
    "write_trials_csv",
]

DEFAULT_SEED = 1729

# stream roles, first element of the seed key after master_seed
ROLE_SAMPLE = 0
ROLE_CALIBRATION = 1
ROLE_COHERENT = 2

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class ExperimentConfig:
    """One measurement setting.

    The probe wavelength comes from ``temperature`` through the source
    calibration, unless ``lambda_a`` overrides it directly.
    ``coincidence_window`` (seconds) enables accidental coincidences.
    """

    source: SourceConfig = field(default_factory=SourceConfig)
    sample: SpectralProfile = field(default_factory=lambda: FlatProfile(0.0))
    sample_arm: str = "b"
    integration_time: float = 1.0
    trials: int = 1500
    master_seed: int = DEFAULT_SEED
    coincidence_window: float | None = None
    temperature: float | None = None
    lambda_a: float | None = None

    @property
    def herald_arm(self) -> str:
        return "a" if self.sample_arm == "b" else "b"

    def wavelengths(self) -> tuple[float, float]:
        if self.lambda_a is not None:
            lam_b = partner_wavelength(self.source.pump_wavelength, self.lambda_a)
            for name, value, (lo, hi) in (("lambda_a", self.lambda_a, LAMBDA_A_RANGE),
                                          ("lambda_b", lam_b, LAMBDA_B_RANGE)):
                if not lo <= value <= hi:
                    raise CalibrationError(f"{name} = {value:.3f} nm outside [{lo:g}, {hi:g}] nm")
            return self.lambda_a, lam_b
        return wavelengths_at_temperature(self.source, self.temperature)

    @property
    def probe_wavelength(self) -> float:
        lam_a, lam_b = self.wavelengths()
        return lam_b if self.sample_arm == "b" else lam_a

    @property
    def probe_lineshape(self) -> Lineshape:
        return self.source.lineshape(self.sample_arm, self.probe_wavelength)

    @property
    def expected_herald_counts(self) -> float:
        return self.source.pair_rate * self.integration_time * self.source.efficiency(self.herald_arm)

    @property
    def expected_alpha(self) -> float:
        """Expected heralded estimate: sample loss composed with probe-arm loss."""
        transmission = 1.0 - effective_alpha(self.sample, self.probe_lineshape)
        return 1.0 - self.source.efficiency(self.sample_arm) * transmission

    def with_options(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)

    def validated(self) -> "ExperimentConfig":
        problems = validate_experiment(self)
        if problems:
            raise ConfigError(problems)
        return self


class TrialRecord(NamedTuple):
    n_a: int
    n_b: int
    n_ab: int


@dataclass(eq=False)
class EnsembleStats:
    """Aggregate of the per-trial estimates of one ensemble.

    ``estimates`` and ``herald_counts`` hold only trials with a non-zero
    herald count; ``n_excluded`` counts the rest.  ``counts`` keeps the raw
    ``(n_a, n_b, n_ab)`` of every trial, in trial order.
    """

    estimates: np.ndarray
    herald_counts: np.ndarray
    counts: np.ndarray
    mean: float
    variance: float
    stderr_of_mean: float
    mean_herald_counts: float
    total_detected_photons: int
    n_excluded: int = 0

    def __eq__(self, other):
        if not isinstance(other, EnsembleStats):
            return NotImplemented
        return (
            np.array_equal(self.estimates, other.estimates)
            and np.array_equal(self.herald_counts, other.herald_counts)
            and np.array_equal(self.counts, other.counts)
            and (self.mean, self.variance, self.stderr_of_mean, self.mean_herald_counts,
                 self.total_detected_photons, self.n_excluded)
            == (other.mean, other.variance, other.stderr_of_mean, other.mean_herald_counts,
                other.total_detected_photons, other.n_excluded)
        )

    @property
    def n_trials(self) -> int:
        return int(self.estimates.size)

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)


@dataclass(frozen=True)
class ScanPoint:
    index: int
    wavelength: float
    temperature: float | None
    stats: EnsembleStats
    calibration: EnsembleStats
    alpha2: float
    alpha2_stderr: float


def derive_seed(master_seed: int, trial_index: int, stream=()) -> np.random.SeedSequence:
    """Independent seed for one trial of one stream."""
    key = [int(master_seed) & _MASK64, *(int(s) for s in stream), int(trial_index)]
    return np.random.SeedSequence(key)


def _generator(master_seed, trial_index, stream):
    return np.random.Generator(np.random.PCG64(derive_seed(master_seed, trial_index, stream)))


def validate_experiment(cfg: ExperimentConfig) -> list[str]:
    problems = [f"source: {p}" for p in validate_source(cfg.source)]
    if cfg.sample_arm not in ("a", "b"):
        problems.append(f"sample_arm must be 'a' or 'b', got {cfg.sample_arm!r}")
    if not cfg.integration_time > 0:
        problems.append(f"integration_time = {cfg.integration_time} must be positive")
    if not (isinstance(cfg.trials, (int, np.integer)) and cfg.trials >= 1):
        problems.append(f"trials = {cfg.trials} must be a positive integer")
    if cfg.coincidence_window is not None and cfg.coincidence_window < 0:
        problems.append("coincidence_window must be non-negative")
    if cfg.temperature is None and cfg.lambda_a is None:
        problems.append("set either temperature or lambda_a")
    elif not problems:
        try:
            cfg.probe_wavelength
            effective_alpha(cfg.sample, cfg.probe_lineshape)
        except ValueError as exc:
            problems.append(str(exc))
    return problems


@dataclass(frozen=True)
class _Model:
    """Per-ensemble constants, resolved once from the config."""

    master_seed: int
    mean_pairs: float
    eta_herald: float
    eta_probe: float
    profile: SpectralProfile
    center: float
    sigma: float
    constant_alpha: float | None
    window_fraction: float
    herald_is_a: bool


def _model(cfg: ExperimentConfig) -> _Model:
    shape = cfg.probe_lineshape
    constant = None
    if cfg.sample.wavelength_independent:
        constant = float(cfg.sample.alpha(shape.center))
    else:
        # raises if the lineshape support leaves a tabulated domain
        effective_alpha(cfg.sample, shape)
    window = cfg.coincidence_window
    return _Model(
        master_seed=cfg.master_seed,
        mean_pairs=cfg.source.pair_rate * cfg.integration_time,
        eta_herald=cfg.source.efficiency(cfg.herald_arm),
        eta_probe=cfg.source.efficiency(cfg.sample_arm),
        profile=cfg.sample,
        center=shape.center,
        sigma=shape.sigma,
        constant_alpha=constant,
        window_fraction=(window / cfg.integration_time) if window else 0.0,
        herald_is_a=cfg.herald_arm == "a",
    )


def _simulate(model: _Model, trial_index: int, stream) -> TrialRecord:
    rng = _generator(model.master_seed, trial_index, stream)
    pairs = int(rng.poisson(model.mean_pairs))
    if model.constant_alpha is not None:
        # exact per-pair thinning when survival does not depend on wavelength
        p_probe = model.eta_probe * (1.0 - model.constant_alpha)
        n_herald = int(rng.binomial(pairs, model.eta_herald))
        n_both = int(rng.binomial(n_herald, p_probe))
        n_probe = n_both + int(rng.binomial(pairs - n_herald, p_probe))
    else:
        wavelengths = rng.normal(model.center, model.sigma, pairs)
        survive = rng.random(pairs) < (1.0 - model.profile.alpha(wavelengths)) * model.eta_probe
        herald = rng.random(pairs) < model.eta_herald
        n_herald = int(np.count_nonzero(herald))
        n_probe = int(np.count_nonzero(survive))
        n_both = int(np.count_nonzero(herald & survive))
    if model.window_fraction:
        n_both += int(rng.poisson(n_herald * n_probe * model.window_fraction))
    if model.herald_is_a:
        return TrialRecord(n_herald, n_probe, n_both)
    return TrialRecord(n_probe, n_herald, n_both)


def run_trial(cfg: ExperimentConfig, trial_index: int, stream=(ROLE_SAMPLE,)) -> TrialRecord:
    """Simulate one integration window."""
    return _simulate(_model(cfg), trial_index, tuple(stream))


def estimate_alpha(rec: TrialRecord, herald_arm: str = "a") -> float:
    """Heralded loss estimate ``1 - n_ab / n_herald``."""
    n_herald = rec.n_a if herald_arm == "a" else rec.n_b
    if n_herald <= 0:
        raise InsufficientDataError("no herald detections in this trial")
    return 1.0 - rec.n_ab / n_herald


def _simulate_chunk(model, indices, stream):
    return [_simulate(model, i, stream) for i in indices]


def _run_records(model, trials, stream, workers):
    stream = tuple(stream)
    if workers is None or workers <= 1 or trials < 2:
        records = _simulate_chunk(model, range(trials), stream)
    else:
        bounds = np.linspace(0, trials, min(workers * 4, trials) + 1).astype(int)
        chunks = [range(lo, hi) for lo, hi in zip(bounds, bounds[1:]) if hi > lo]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_simulate_chunk, [model] * len(chunks), chunks,
                             [stream] * len(chunks))
            records = [rec for part in parts for rec in part]
    return np.array(records, dtype=np.int64).reshape(trials, 3)


def _aggregate(estimates, herald_counts, counts, detected, n_excluded):
    if estimates.size == 0:
        raise EnsembleError("every trial had zero herald counts")
    mean = float(np.mean(estimates))
    variance = float(np.var(estimates, ddof=1)) if estimates.size > 1 else 0.0
    return EnsembleStats(
        estimates=estimates,
        herald_counts=herald_counts,
        counts=counts,
        mean=mean,
        variance=variance,
        stderr_of_mean=math.sqrt(variance / estimates.size),
        mean_herald_counts=float(np.mean(herald_counts)),
        total_detected_photons=int(detected),
        n_excluded=int(n_excluded),
    )


def run_ensemble(cfg: ExperimentConfig, stream=(ROLE_SAMPLE,), workers: int = 1) -> EnsembleStats:
    """Run ``cfg.trials`` heralded trials and aggregate their estimates.

    Trials without a herald detection are dropped and counted in
    ``n_excluded``.
    """
    cfg.validated()
    counts = _run_records(_model(cfg), cfg.trials, stream, workers)
    herald = counts[:, 0] if cfg.herald_arm == "a" else counts[:, 1]
    ok = herald > 0
    estimates = 1.0 - counts[ok, 2] / herald[ok]
    detected = counts[:, 0].sum() + counts[:, 1].sum()
    return _aggregate(estimates, herald[ok].astype(float), counts, detected, (~ok).sum())


def run_coherent_ensemble(cfg: ExperimentConfig, stream=(ROLE_COHERENT,),
                          nbar_input: float | None = None) -> EnsembleStats:
    """Ideal-laser comparator at the same input intensity as the heralded probe.

    Each trial sends ``n ~ Poisson(nbar_input)`` photons through the total
    probe-arm loss and estimates ``1 - n_detected / nbar_input``, treating the
    laser intensity as perfectly calibrated.  ``nbar_input`` defaults to the
    expected herald count per trial, which is the input intensity of the
    heralded probe.
    """
    cfg.validated()
    alpha = cfg.expected_alpha
    nbar = cfg.expected_herald_counts if nbar_input is None else float(nbar_input)
    if not nbar > 0:
        raise EnsembleError("coherent comparator needs a positive input intensity")
    stream = tuple(stream)
    n_in = np.empty(cfg.trials, dtype=np.int64)
    n_out = np.empty(cfg.trials, dtype=np.int64)
    for i in range(cfg.trials):
        rng = _generator(cfg.master_seed, i, stream)
        n_in[i] = rng.poisson(nbar)
        n_out[i] = rng.binomial(n_in[i], 1.0 - alpha)
    estimates = 1.0 - n_out / nbar
    counts = np.column_stack([n_in, n_out, n_out])
    return _aggregate(estimates, np.full(cfg.trials, nbar), counts, n_out.sum(), 0)


def scan_spectrum(cfg: ExperimentConfig, temperatures, workers: int = 1) -> list[ScanPoint]:
    """Measure the sample at each temperature and divide out the system loss.

    Each point pairs a sample ensemble with an independent sample-free
    calibration ensemble.  Points are returned ordered by probe wavelength.
    """
    points = []
    for i, temp in enumerate(temperatures):
        point_cfg = replace(cfg, temperature=float(temp), lambda_a=None)
        stats = run_ensemble(point_cfg, (ROLE_SAMPLE, i), workers)
        cal_cfg = replace(point_cfg, sample=FlatProfile(0.0))
        cal = run_ensemble(cal_cfg, (ROLE_CALIBRATION, i), workers)
        alpha2 = extract_sample_loss(stats.mean, cal.mean)
        t_loss, s_loss = stats.mean, cal.mean
        stderr = math.hypot(
            stats.stderr_of_mean / (1.0 - s_loss),
            (1.0 - t_loss) * cal.stderr_of_mean / (1.0 - s_loss) ** 2,
        )
        points.append(ScanPoint(i, point_cfg.probe_wavelength, float(temp), stats, cal, alpha2, stderr))
    points.sort(key=lambda p: p.wavelength)
    return points


def write_trials_csv(path, stats: EnsembleStats) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["trial", "n_a", "n_b", "n_ab"])
        for i, (n_a, n_b, n_ab) in enumerate(stats.counts.tolist()):
            writer.writerow([i, n_a, n_b, n_ab])

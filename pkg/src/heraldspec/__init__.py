"""Sub-shot-noise absorption spectroscopy with heralded single photons.

Simulates the heralded counting experiment, implements the heralded loss
estimator and the Fock/laser precision limits, and quantifies the
variance reduction heralded photons give over an ideal laser.
"""

__version__ = "0.1.0"

from .analysis import (
    absorbance_spectrum,
    fit_precision_scaling,
    quantum_advantage,
    resolution_analysis,
)
from .engine import (
    EnsembleStats,
    ExperimentConfig,
    TrialRecord,
    estimate_alpha,
    run_coherent_ensemble,
    run_ensemble,
    run_trial,
    scan_spectrum,
)
from .estimators import (
    AbsorbanceTransformer,
    HeraldedLossEstimator,
    PrecisionScalingRegressor,
    SystemLossCalibrator,
)
from .samples import FlatProfile, GaussianBandpass, TabulatedProfile, alpha_at, effective_alpha
from .source import Lineshape, SourceConfig, wavelengths_at_temperature
from .stats import (
    LossBudget,
    absorbance_from_alpha,
    compose_losses,
    extract_sample_loss,
    fock_precision,
    ideal_advantage,
    photons_required,
    snl_precision,
)

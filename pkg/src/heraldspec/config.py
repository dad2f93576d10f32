"""YAML run configuration.

A config file has up to six sections, each optional::

    source:      SourceConfig fields, plus calibration_file or calibration rows
    sample:      profile mapping with a ``kind`` key
    experiment:  sample_arm, integration_time, trials, master_seed,
                 temperature | lambda_a | probe_wavelength, coincidence_window
    scan:        probe_wavelengths | temperatures, batch_size, baseline
    advantage:   batch_size, baseline
    resolve:     fine_step_ms, fine_stop_ms, coarse_step_ms, coarse_stop_ms,
                 estimates, ks, combine

Relative file paths are resolved against the config file's directory.
Precedence is command-line flag, then file, then built-in default.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .engine import ExperimentConfig, validate_experiment
from .errors import CalibrationError, ConfigError, DomainError, ParseError
from .samples import FlatProfile, profile_from_dict
from .source import SourceConfig, load_calibration, temperature_for_wavelength

__all__ = [
    "ScanOptions",
    "AdvantageOptions",
    "ResolveOptions",
    "RunConfig",
    "load_config",
    "config_from_dict",
    "config_digest",
]

_SECTIONS = ("source", "sample", "experiment", "scan", "advantage", "resolve")
_BASELINES = ("analytic", "simulated")


@dataclass(frozen=True)
class ScanOptions:
    probe_wavelengths: tuple | None = None
    temperatures: tuple | None = None
    batch_size: int = 100
    baseline: str = "analytic"


@dataclass(frozen=True)
class AdvantageOptions:
    batch_size: int = 100
    baseline: str = "analytic"


@dataclass(frozen=True)
class ResolveOptions:
    fine_step_ms: int = 1
    fine_stop_ms: int = 10
    coarse_step_ms: int = 5
    coarse_stop_ms: int = 50
    estimates: int = 800
    ks: tuple = (2, 3, 4)
    combine: str = "max"

    def integration_times(self) -> list[float]:
        """Sweep in seconds: fine steps up to ``fine_stop_ms``, then coarse steps."""
        ms = list(range(self.fine_step_ms, self.fine_stop_ms + 1, self.fine_step_ms))
        start = (ms[-1] if ms else 0) + self.coarse_step_ms
        ms += list(range(start, self.coarse_stop_ms + 1, self.coarse_step_ms))
        return [m / 1000.0 for m in ms]


@dataclass(frozen=True)
class RunConfig:
    experiment: ExperimentConfig
    scan: ScanOptions = field(default_factory=ScanOptions)
    advantage: AdvantageOptions = field(default_factory=AdvantageOptions)
    resolve: ResolveOptions = field(default_factory=ResolveOptions)
    path: str | None = None

    def resolved(self) -> dict:
        """Fully resolved configuration as plain data, used for the digest."""
        exp = self.experiment
        return {
            "source": {
                **{f.name: getattr(exp.source, f.name) for f in dataclasses.fields(exp.source)
                   if f.name != "calibration"},
                "calibration": [list(row) for row in exp.source.calibration],
            },
            "sample": exp.sample.to_dict(),
            "experiment": {
                "sample_arm": exp.sample_arm,
                "integration_time": exp.integration_time,
                "trials": exp.trials,
                "master_seed": exp.master_seed,
                "coincidence_window": exp.coincidence_window,
                "temperature": exp.temperature,
                "lambda_a": exp.lambda_a,
            },
            "scan": _plain(dataclasses.asdict(self.scan)),
            "advantage": dataclasses.asdict(self.advantage),
            "resolve": _plain(dataclasses.asdict(self.resolve)),
        }

    def digest(self) -> str:
        return config_digest(self.resolved())


def _plain(d):
    return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


def config_digest(resolved: dict) -> str:
    text = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _pop_known(section_name, data, known, problems):
    unknown = sorted(set(data) - set(known))
    for key in unknown:
        problems.append(f"{section_name}: unknown key {key!r}")
    return {k: data[k] for k in known if k in data}


def _number(section, key, value, problems, kind=float):
    try:
        if kind is int:
            if isinstance(value, bool) or float(value) != int(value):
                raise ValueError
            return int(value)
        return float(value)
    except (TypeError, ValueError):
        problems.append(f"{section}.{key}: expected a number, got {value!r}")
        return None


def _source(data, base_dir, problems):
    fields = [f.name for f in dataclasses.fields(SourceConfig) if f.name != "calibration"]
    data = _pop_known("source", data, fields + ["calibration", "calibration_file"], problems)
    kwargs = {}
    for key in fields:
        if key in data:
            value = _number("source", key, data[key], problems)
            if value is not None:
                kwargs[key] = value
    if "calibration_file" in data and "calibration" in data:
        problems.append("source: give calibration or calibration_file, not both")
    elif "calibration_file" in data:
        path = Path(data["calibration_file"])
        if not path.is_absolute():
            path = base_dir / path
        # OSError propagates: a missing file is an I/O problem, not a config one
        kwargs["calibration"] = load_calibration(path)
    elif "calibration" in data:
        try:
            kwargs["calibration"] = tuple((float(t), float(lam)) for t, lam in data["calibration"])
        except (TypeError, ValueError):
            problems.append("source.calibration: expected a list of [temperature, lambda_a] rows")
    return SourceConfig(**kwargs)


def _sample(data, base_dir, problems):
    if data is None:
        return FlatProfile(0.0)
    try:
        return profile_from_dict(data, base_dir)
    except (KeyError, TypeError) as exc:
        problems.append(f"sample: missing or malformed field {exc}")
    except DomainError as exc:
        problems.append(f"sample: {exc}")
    return FlatProfile(0.0)


def _experiment(data, source, sample, problems):
    known = ["sample_arm", "integration_time", "trials", "master_seed", "coincidence_window",
             "temperature", "lambda_a", "probe_wavelength"]
    data = _pop_known("experiment", data, known, problems)
    kwargs = {"source": source, "sample": sample}
    if "sample_arm" in data:
        kwargs["sample_arm"] = str(data["sample_arm"])
    for key, kind in (("integration_time", float), ("trials", int), ("master_seed", int),
                      ("temperature", float), ("lambda_a", float)):
        if key in data:
            value = _number("experiment", key, data[key], problems, kind)
            if value is not None:
                kwargs[key] = value
    if data.get("coincidence_window") is not None:
        value = _number("experiment", "coincidence_window", data["coincidence_window"], problems)
        kwargs["coincidence_window"] = value
    given = [k for k in ("temperature", "lambda_a", "probe_wavelength") if k in data]
    if len(given) > 1:
        problems.append(f"experiment: set only one of {', '.join(given)}")
    if "probe_wavelength" in data:
        value = _number("experiment", "probe_wavelength", data["probe_wavelength"], problems)
        if value is not None:
            try:
                kwargs["temperature"] = temperature_for_wavelength(
                    source, value, kwargs.get("sample_arm", "b"))
            except (CalibrationError, ValueError, IndexError) as exc:
                problems.append(f"experiment.probe_wavelength: {exc}")
    return ExperimentConfig(**kwargs)


def _options(cls, name, data, problems):
    names = [f.name for f in dataclasses.fields(cls)]
    data = _pop_known(name, data, names, problems)
    kwargs = {}
    for key, value in data.items():
        default = getattr(cls(), key)
        if isinstance(default, str):
            kwargs[key] = str(value)
        elif isinstance(default, int):
            value = _number(name, key, value, problems, int)
            if value is not None:
                kwargs[key] = value
        else:
            try:
                kwargs[key] = tuple(float(v) if key != "ks" else int(v) for v in value)
            except (TypeError, ValueError):
                problems.append(f"{name}.{key}: expected a list of numbers")
    opts = cls(**kwargs)
    if "baseline" in names and opts.baseline not in _BASELINES:
        problems.append(f"{name}.baseline must be one of {_BASELINES}")
    if "batch_size" in names and opts.batch_size < 2:
        problems.append(f"{name}.batch_size must be at least 2")
    return opts


def _validate_options(cfg: RunConfig, problems):
    r = cfg.resolve
    for key in ("fine_step_ms", "coarse_step_ms", "estimates"):
        if getattr(r, key) < 1:
            problems.append(f"resolve.{key} must be a positive integer")
    if not problems and len(r.integration_times()) < 3:
        problems.append("resolve: the integration-time sweep needs at least 3 increments")
    if r.combine not in ("max", "sum", "pooled"):
        problems.append("resolve.combine must be one of max, sum, pooled")
    if not r.ks or any(k <= 0 for k in r.ks):
        problems.append("resolve.ks must be positive multipliers")
    s = cfg.scan
    if s.probe_wavelengths is not None and s.temperatures is not None:
        problems.append("scan: give probe_wavelengths or temperatures, not both")


def config_from_dict(data: dict, base_dir=".", overrides: dict | None = None,
                     path: str | None = None) -> RunConfig:
    """Build and validate a :class:`RunConfig`; raises ConfigError listing every problem."""
    base_dir = Path(base_dir)
    data = dict(data or {})
    overrides = overrides or {}
    problems = []
    for key in sorted(set(data) - set(_SECTIONS)):
        problems.append(f"unknown section {key!r}")
    sections = {}
    for name in _SECTIONS:
        value = data.get(name)
        if value is not None and not isinstance(value, dict):
            problems.append(f"section {name!r} must be a mapping")
            value = None
        sections[name] = value
    source = _source(dict(sections["source"] or {}), base_dir, problems)
    sample = _sample(sections["sample"], base_dir, problems)
    exp_data = dict(sections["experiment"] or {})
    if overrides.get("seed") is not None:
        exp_data["master_seed"] = overrides["seed"]
    experiment = _experiment(exp_data, source, sample, problems)
    cfg = RunConfig(
        experiment=experiment,
        scan=_options(ScanOptions, "scan", dict(sections["scan"] or {}), problems),
        advantage=_options(AdvantageOptions, "advantage", dict(sections["advantage"] or {}),
                           problems),
        resolve=_options(ResolveOptions, "resolve", dict(sections["resolve"] or {}), problems),
        path=path,
    )
    if not any(p.startswith(("source", "sample")) for p in problems):
        problems.extend(f"experiment: {p}" if not p.startswith("source") else p
                        for p in validate_experiment(experiment))
    _validate_options(cfg, problems)
    if problems:
        raise ConfigError(problems)
    return cfg


def load_config(path, overrides: dict | None = None) -> RunConfig:
    """Read a YAML config file.  Never modifies the file."""
    path = Path(path)
    text = path.read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"invalid YAML: {exc}", path) from None
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return config_from_dict(data or {}, path.parent, overrides, str(path))

"""``heraldspec`` command-line interface.

Exit codes: 0 success, 2 config/validation error, 3 runtime/statistical
error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import config_digest, load_config
from .engine import write_trials_csv
from .errors import (
    CalibrationError,
    ConfigError,
    DomainError,
    EnsembleError,
    FitError,
    HeraldspecError,
    InsufficientDataError,
    ParseError,
    ResolutionUndefinedError,
)
from .reports import (
    RESOLUTION_COLUMNS,
    SCATTER_COLUMNS,
    SPECTRUM_COLUMNS,
    THEORY_COLUMNS,
    write_structured,
    write_table,
)
from .workflows import ensemble_summary, run_advantage, run_resolve, run_scan, theory_rows

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_IO = 4


def _common(parser):
    parser.add_argument("--seed", type=int, default=None, help="override the master seed")
    parser.add_argument("--workers", type=int, default=1, help="worker processes for ensembles")
    parser.add_argument("--out", default=".", help="output directory (default: current)")
    parser.add_argument("--format", choices=("csv", "structured"), default="csv",
                        help="tabular CSV or a structured JSON document")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heraldspec",
        description="Heralded-photon absorption spectroscopy simulator.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("theory", help="precision curves for Fock and laser probes")
    _common(p)
    p.add_argument("--alpha", type=float, nargs="+", help="explicit alpha grid")
    p.add_argument("--alpha-start", type=float, default=0.0)
    p.add_argument("--alpha-stop", type=float, default=1.0)
    p.add_argument("--alpha-num", type=int, default=101, help="grid points incl. endpoints")
    p.add_argument("--nu", type=int, default=1)
    p.add_argument("--nbar", type=float, default=1.0)

    p = sub.add_parser("scan", help="simulate a temperature-scanned spectrum")
    _common(p)
    p.add_argument("config")
    p.add_argument("--baseline", choices=("analytic", "simulated"), default=None)
    p.add_argument("--decadic", action="store_true", help="write log10 absorbance")
    p.add_argument("--trials-csv", action="store_true", help="also write raw per-trial counts")

    p = sub.add_parser("advantage", help="ensemble and quantum advantage at one wavelength")
    _common(p)
    p.add_argument("config")
    p.add_argument("--baseline", choices=("analytic", "simulated"), default=None)
    p.add_argument("--trials-csv", action="store_true")

    p = sub.add_parser("resolve", help="photons needed to resolve two samples")
    _common(p)
    p.add_argument("config_a")
    p.add_argument("config_b")
    p.add_argument("--ks", type=int, nargs="+", default=None, help="separation multipliers")
    p.add_argument("--combine", choices=("max", "sum", "pooled"), default=None)

    p = sub.add_parser("validate", help="check a config and report every violation")
    _common(p)
    p.add_argument("config")
    return parser


class _Run:
    """Collects artifact paths and writes the manifest."""

    def __init__(self, args):
        self.args = args
        self.out = Path(args.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.started = time.perf_counter()
        self.artifacts = []

    def table(self, stem, columns, rows):
        if self.args.format == "structured":
            doc = {"columns": list(columns), "rows": [list(r) for r in rows]}
            path = write_structured(self.out / f"{stem}.json", doc)
        else:
            path = write_table(self.out / f"{stem}.csv", columns, rows)
        self.artifacts.append(path.name)
        return path

    def document(self, stem, doc):
        path = write_structured(self.out / f"{stem}.json", doc)
        self.artifacts.append(path.name)
        return path

    def manifest(self, digest, seed, extra=None):
        doc = {
            "command": self.args.command,
            "config_digest": digest,
            "master_seed": seed,
            "artifacts": self.artifacts,
            "wall_clock_seconds": time.perf_counter() - self.started,
            "version": __version__,
        }
        if extra:
            doc.update(extra)
        write_structured(self.out / "manifest.json", doc)


def _overrides(args):
    return {"seed": args.seed}


def cmd_theory(args) -> int:
    if args.alpha:
        grid = list(args.alpha)
    else:
        if args.alpha_num < 1:
            raise ConfigError("--alpha-num must be at least 1")
        grid = np.linspace(args.alpha_start, args.alpha_stop, args.alpha_num).tolist()
    run = _Run(args)
    rows = theory_rows(grid, args.nu, args.nbar)
    run.table("theory", THEORY_COLUMNS, rows)
    resolved = {"alpha": grid, "nu": args.nu, "nbar": args.nbar}
    run.manifest(config_digest(resolved), None)
    return EXIT_OK


def cmd_scan(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    run = _Run(args)
    result = run_scan(cfg, args.workers, args.baseline, args.decadic)
    run.table("spectrum", SPECTRUM_COLUMNS, result.rows)
    if args.trials_csv:
        for p in result.points:
            name = f"trials_{p.index:03d}.csv"
            write_trials_csv(run.out / name, p.stats)
            run.artifacts.append(name)
    if result.n_clamped:
        print(f"warning: {result.n_clamped} absorbance value(s) clamped", file=sys.stderr)
    run.manifest(cfg.digest(), cfg.experiment.master_seed,
                 {"absorbance_clamped": result.n_clamped, "decadic": args.decadic})
    return EXIT_OK


def cmd_advantage(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    run = _Run(args)
    stats, report = run_advantage(cfg, args.workers, args.baseline)
    run.table("advantage_batches", ("batch", "advantage_pct"),
              [(i, 100.0 * a) for i, a in enumerate(report.per_batch_advantage.tolist())])
    summary = {
        "lambda_nm": cfg.experiment.probe_wavelength,
        "ensemble": ensemble_summary(stats),
        "mean_advantage_pct": report.mean_advantage_percent,
        "advantage_stderr_pct": report.stderr_percent if report.stderr_defined else None,
        "theory_max_pct": report.theoretical_max_percent,
        "n_batches": report.n_batches,
        "batch_size": report.batch_size,
    }
    run.document("advantage_summary", summary)
    if args.trials_csv:
        write_trials_csv(run.out / "trials.csv", stats)
        run.artifacts.append("trials.csv")
    run.manifest(cfg.digest(), cfg.experiment.master_seed)
    print(f"advantage {report.mean_advantage_percent:.2f} % "
          f"(theory max {report.theoretical_max_percent:.2f} %)")
    return EXIT_OK


def cmd_resolve(args) -> int:
    cfg_a = load_config(args.config_a, _overrides(args))
    cfg_b = load_config(args.config_b, _overrides(args))
    run = _Run(args)
    result = run_resolve(cfg_a, cfg_b, args.ks, args.combine, args.workers)
    rep = result.report
    rows = [(k, v["fock"], v["coherent"], v["saved"]) for k, v in rep.photons_required.items()]
    run.table("resolution", RESOLUTION_COLUMNS, rows)
    run.table("resolution_scatter", SCATTER_COLUMNS, result.scatter_rows)
    digest = config_digest({"A": cfg_a.resolved(), "B": cfg_b.resolved(),
                            "ks": args.ks, "combine": args.combine})
    run.manifest(digest, [cfg_a.experiment.master_seed, cfg_b.experiment.master_seed],
                 {"coefficients": rep.coefficients, "separation": rep.separation,
                  "combine": rep.combine})
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        cfg = load_config(args.config, _overrides(args))
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"invalid: {problem}")
        return EXIT_CONFIG
    lam_a, lam_b = cfg.experiment.wavelengths()
    print(f"valid: {args.config} (lambda_a = {lam_a:.3f} nm, lambda_b = {lam_b:.3f} nm)")
    return EXIT_OK


_COMMANDS = {
    "theory": cmd_theory,
    "scan": cmd_scan,
    "advantage": cmd_advantage,
    "resolve": cmd_resolve,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except (ParseError, CalibrationError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EnsembleError, FitError, ResolutionUndefinedError, InsufficientDataError,
            HeraldspecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

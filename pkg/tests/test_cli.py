import hashlib
import json
import math
from pathlib import Path

import pytest
import yaml

from heraldspec.cli import main
from heraldspec.reports import read_table
from heraldspec.stats import fock_precision, snl_precision

CONFIGS = Path(__file__).parents[1] / "configs"
CALIBRATION = str(CONFIGS / "calibration_default.txt")


def write_config(path, data):
    path.write_text(yaml.safe_dump(data))
    return str(path)


def small_scan(tmp_path, **experiment):
    data = yaml.safe_load((CONFIGS / "gaussian_filter.yaml").read_text())
    data["source"]["calibration_file"] = CALIBRATION
    data["experiment"].update({"trials": 200, **experiment})
    data["scan"]["probe_wavelengths"] = [808, 810, 813]
    return write_config(tmp_path / "scan.yaml", data)


def small_resolve(tmp_path, name, alpha, **experiment):
    data = yaml.safe_load((CONFIGS / "hbo2_like.yaml").read_text())
    data["source"]["calibration_file"] = CALIBRATION
    data["sample"]["alpha"] = alpha
    data["experiment"].update(experiment)
    data["resolve"].update({"estimates": 200, "coarse_stop_ms": 20})
    return write_config(tmp_path / name, data)


class TestTheory:
    def test_rows_delegate_to_formulas(self, tmp_path):
        assert main(["theory", "--alpha", "0.25", "0.5", "0.75", "--out", str(tmp_path)]) == 0
        rows = read_table(tmp_path / "theory.csv")
        assert list(rows[0]) == ["alpha", "delta_alpha_fock", "delta_alpha_snl", "fisher_fock",
                                 "fisher_snl", "advantage_pct"]
        for row in rows:
            a = float(row["alpha"])
            assert float(row["delta_alpha_fock"]) == fock_precision(a, 1, 1.0).delta_alpha
            assert float(row["delta_alpha_snl"]) == snl_precision(a, 1, 1.0).delta_alpha
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["command"] == "theory" and manifest["artifacts"] == ["theory.csv"]

    def test_endpoints_and_peak(self, tmp_path):
        main(["theory", "--alpha", "0.778", "1.0", "--out", str(tmp_path)])
        peak, full = read_table(tmp_path / "theory.csv")
        assert float(peak["advantage_pct"]) == pytest.approx(22.2, abs=1e-9)
        assert float(full["delta_alpha_fock"]) == 0.0 == float(full["delta_alpha_snl"])

    def test_structured_format(self, tmp_path):
        main(["theory", "--alpha-num", "5", "--format", "structured", "--out", str(tmp_path)])
        doc = json.loads((tmp_path / "theory.json").read_text())
        assert len(doc["rows"]) == 5
        # fisher information is infinite where the variance vanishes
        assert doc["rows"][-1][3] == "inf"

    def test_full_precision(self, tmp_path):
        main(["theory", "--alpha", "0.1", "--nu", "3", "--nbar", "7", "--out", str(tmp_path)])
        text = (tmp_path / "theory.csv").read_text().splitlines()[1].split(",")
        assert float(text[1]) == math.sqrt(0.1 * 0.9 / 21)
        assert text[1] == repr(math.sqrt(0.1 * 0.9 / 21))


class TestValidate:
    def test_default_config(self, capsys):
        assert main(["validate", str(CONFIGS / "default.yaml")]) == 0
        assert capsys.readouterr().out.startswith("valid:")

    @pytest.mark.parametrize("name", ["gaussian_filter.yaml", "advantage_0778.yaml",
                                      "hbo2_like.yaml", "hbco_like.yaml"])
    def test_shipped_configs(self, name):
        assert main(["validate", str(CONFIGS / name)]) == 0

    def test_wavelength_bound(self, tmp_path, capsys):
        path = write_config(tmp_path / "c.yaml", {
            "source": {"calibration": [[20, 770.0], [30, 790.0]]},
            "experiment": {"temperature": 25.0},
        })
        assert main(["validate", path]) == 2
        out = capsys.readouterr().out
        assert "773" in out and out.startswith("invalid:")

    def test_partner_bound(self, tmp_path, capsys):
        path = write_config(tmp_path / "c.yaml", {
            "source": {"calibration": [[20, 773.0], [30, 790.0]]},
            "experiment": {"temperature": 25.0},
        })
        assert main(["validate", path]) == 2
        assert "845" in capsys.readouterr().out

    def test_every_problem_listed(self, tmp_path, capsys):
        path = write_config(tmp_path / "c.yaml", {
            "source": {"eta_a": 2.0, "pair_rate": -1},
            "experiment": {"trials": 0, "temperature": 100, "bogus": 1},
        })
        assert main(["validate", path]) == 2
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) >= 3
        assert any("bogus" in line for line in lines)

    def test_zero_trials(self, tmp_path, capsys):
        path = write_config(tmp_path / "c.yaml", {
            "source": {"calibration_file": CALIBRATION},
            "experiment": {"temperature": 100, "trials": 0},
        })
        assert main(["validate", path]) == 2
        assert "trials" in capsys.readouterr().out
        assert main(["scan", path, "--out", str(tmp_path / "o")]) == 2

    def test_missing_calibration_file(self, tmp_path, capsys):
        path = write_config(tmp_path / "c.yaml", {
            "source": {"calibration_file": "nowhere.txt"},
            "experiment": {"temperature": 100},
        })
        assert main(["validate", path]) == 4
        assert str(tmp_path / "nowhere.txt") in capsys.readouterr().err

    def test_missing_config(self, tmp_path, capsys):
        assert main(["validate", str(tmp_path / "absent.yaml")]) == 4
        assert "absent.yaml" in capsys.readouterr().err


class TestScan:
    def test_outputs_and_rerun(self, tmp_path):
        cfg = small_scan(tmp_path)
        before = hashlib.sha256(Path(cfg).read_bytes()).hexdigest()
        for out in ("r1", "r2"):
            assert main(["scan", cfg, "--out", str(tmp_path / out), "--trials-csv"]) == 0
        a = (tmp_path / "r1" / "spectrum.csv").read_bytes()
        assert a == (tmp_path / "r2" / "spectrum.csv").read_bytes()
        assert hashlib.sha256(Path(cfg).read_bytes()).hexdigest() == before
        rows = read_table(tmp_path / "r1" / "spectrum.csv")
        assert len(rows) == 3
        assert list(rows[0]) == ["lambda_nm", "alpha2_mean", "alpha2_stderr", "absorbance",
                                 "advantage_pct", "advantage_stderr_pct", "theory_max_pct"]
        m1 = json.loads((tmp_path / "r1" / "manifest.json").read_text())
        m2 = json.loads((tmp_path / "r2" / "manifest.json").read_text())
        assert m1["config_digest"] == m2["config_digest"]
        assert m1["master_seed"] == 1729
        assert "trials_000.csv" in m1["artifacts"]
        assert (tmp_path / "r1" / "trials_000.csv").read_text().startswith("trial,n_a,n_b,n_ab\n")

    def test_seed_flag_overrides_file(self, tmp_path):
        cfg = small_scan(tmp_path)
        main(["scan", cfg, "--out", str(tmp_path / "a")])
        main(["scan", cfg, "--out", str(tmp_path / "b"), "--seed", "99"])
        assert json.loads((tmp_path / "b" / "manifest.json").read_text())["master_seed"] == 99
        assert ((tmp_path / "a" / "spectrum.csv").read_bytes()
                != (tmp_path / "b" / "spectrum.csv").read_bytes())

    def test_batch_larger_than_trials(self, tmp_path):
        cfg = small_scan(tmp_path, trials=50)
        assert main(["scan", cfg, "--out", str(tmp_path / "o")]) == 2


class TestAdvantage:
    def test_summary(self, tmp_path, capsys):
        data = yaml.safe_load((CONFIGS / "advantage_0778.yaml").read_text())
        data["source"]["calibration_file"] = CALIBRATION
        data["experiment"]["trials"] = 300
        cfg = write_config(tmp_path / "adv.yaml", data)
        assert main(["advantage", cfg, "--out", str(tmp_path / "o")]) == 0
        summary = json.loads((tmp_path / "o" / "advantage_summary.json").read_text())
        assert summary["n_batches"] == 3
        assert summary["theory_max_pct"] == pytest.approx(22.2, abs=1.0)
        assert "advantage" in capsys.readouterr().out


class TestResolve:
    def test_single_k(self, tmp_path):
        a = small_resolve(tmp_path, "a.yaml", 0.20)
        b = small_resolve(tmp_path, "b.yaml", 0.25)
        assert main(["resolve", a, b, "--ks", "2", "--out", str(tmp_path / "o")]) == 0
        rows = read_table(tmp_path / "o" / "resolution.csv")
        assert len(rows) == 1 and rows[0]["k"] == "2"
        assert int(rows[0]["n_saved"]) > 0
        scatter = read_table(tmp_path / "o" / "resolution_scatter.csv")
        # 10 fine + 2 coarse increments, two samples, two modes
        assert len(scatter) == 12 * 4

    def test_identical_profiles(self, tmp_path, capsys):
        a = small_resolve(tmp_path, "a.yaml", 0.20)
        assert main(["resolve", a, a, "--out", str(tmp_path / "o")]) == 3
        assert "identical" in capsys.readouterr().err

    def test_mismatched_wavelength(self, tmp_path, capsys):
        a = small_resolve(tmp_path, "a.yaml", 0.20)
        b = small_resolve(tmp_path, "b.yaml", 0.25, probe_wavelength=795.0)
        assert main(["resolve", a, b, "--out", str(tmp_path / "o")]) == 2
        assert "probe wavelengths differ" in capsys.readouterr().err

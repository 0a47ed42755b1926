import csv
import json
import subprocess
import sys

import pytest

from catforge import cli
from catforge.bank import load_csv
from catforge.config import SEED_ENV
from catforge.report import RunManifest

EXAMPLE_CONFIG = {
    "seed": 7,
    "bank": {"generate": {"size": 100, "model": "4PL"}},
    "examinees": {"count": 10},
    "initializer": {"kind": "random"},
    "selector": {"kind": "max_info"},
    "estimator": {"kind": "hill_climbing"},
    "stopper": {"kind": "max_items", "max_items": 20},
}


@pytest.fixture(autouse=True)
def no_env_seed(monkeypatch):
    monkeypatch.delenv(SEED_ENV, raising=False)


def write_config(tmp_path, config=EXAMPLE_CONFIG, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(config))
    return path


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestGenerateBank:
    def test_three_pl_bank(self, tmp_path, capsys):
        out = tmp_path / "bank.csv"
        assert cli.main(["generate-bank", "--size", "5", "--model", "3PL", "--out", str(out)]) == 0
        rows = read_rows(out)
        assert rows[0] == ["a", "b", "c", "d", "r"]
        assert len(rows) == 6
        assert all(float(r[3]) == 1.0 for r in rows[1:])
        manifest_path = capsys.readouterr().out.strip()
        assert manifest_path == str(out) + ".manifest.json"

    def test_corr_echoed_in_manifest(self, tmp_path, capsys):
        out = tmp_path / "bank.csv"
        assert cli.main(["generate-bank", "--size", "50", "--corr", "0.5", "--out", str(out)]) == 0
        manifest = RunManifest.read(capsys.readouterr().out.strip())
        assert manifest.config["corr"] == 0.5
        assert manifest.command == "generate-bank"

    @pytest.mark.parametrize("args", [["--size", "0"], ["--size", "5", "--model", "5PL"], ["--size", "5", "--corr", "2"]])
    def test_usage_errors(self, tmp_path, args):
        with pytest.raises(SystemExit) as exc:
            cli.main(["generate-bank", *args, "--out", str(tmp_path / "x.csv")])
        assert exc.value.code == 1

    def test_unwritable_path(self, tmp_path):
        assert cli.main(["generate-bank", "--size", "5", "--out", str(tmp_path / "no" / "dir" / "x.csv")]) == 2


class TestValidateBank:
    def test_valid(self, tmp_path):
        out = tmp_path / "bank.csv"
        cli.main(["generate-bank", "--size", "5", "--out", str(out)])
        assert cli.main(["validate-bank", str(out)]) == 0

    def test_invalid(self, tmp_path, capsys):
        path = tmp_path / "bank.csv"
        path.write_text("a,b,c,d,r\n1.0,0.0,0.5,0.4,0\n")
        assert cli.main(["validate-bank", str(path)]) == 1
        assert "row 0, parameter c" in capsys.readouterr().err

    def test_missing(self, tmp_path):
        assert cli.main(["validate-bank", str(tmp_path / "none.csv")]) == 1


class TestSimulate:
    def test_example_run(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert cli.main(["simulate", str(write_config(tmp_path)), "--out", str(out)]) == 0
        assert capsys.readouterr().out.strip() == str(out / "manifest.json")
        trajectories = sorted((out / "trajectories").iterdir())
        assert len(trajectories) == 10
        for path in trajectories:
            rows = read_rows(path)
            assert rows[0] == ["step", "item_index", "response", "theta_hat", "see", "var", "info"]
            assert len(rows) == 21
        metrics = dict(read_rows(out / "validity.csv")[1:])
        assert set(metrics) >= {"bias", "mse", "rmse", "overlap"}
        assert len(load_csv(out / "bank.csv")) == 100
        assert (out / "charts" / "exposure.svg").exists() and (out / "charts" / "exposure.csv").exists()

    def test_rerun_is_byte_identical(self, tmp_path):
        config = write_config(tmp_path)
        cli.main(["simulate", str(config), "--out", str(tmp_path / "a")])
        cli.main(["simulate", str(config), "--out", str(tmp_path / "b"), "--workers", "3"])
        cli.main(["simulate", str(tmp_path / "a" / "manifest.json"), "--out", str(tmp_path / "c")])
        files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
        assert len(files) > 10
        for rel in files:
            if rel.name == "manifest.json":
                continue
            a = (tmp_path / "a" / rel).read_bytes()
            assert a == (tmp_path / "b" / rel).read_bytes(), rel
            assert a == (tmp_path / "c" / rel).read_bytes(), rel
        manifests = [RunManifest.read(tmp_path / d / "manifest.json") for d in "abc"]
        assert manifests[0] == manifests[1] == manifests[2]

    def test_env_seed(self, tmp_path, monkeypatch):
        config = write_config(tmp_path)
        cli.main(["simulate", str(config), "--out", str(tmp_path / "a")])
        monkeypatch.setenv(SEED_ENV, "123")
        cli.main(["simulate", str(config), "--out", str(tmp_path / "b")])
        assert RunManifest.read(tmp_path / "b" / "manifest.json").seed == 123
        assert (tmp_path / "a" / "examinees.csv").read_bytes() != (tmp_path / "b" / "examinees.csv").read_bytes()

    def test_missing_stopper(self, tmp_path, capsys):
        config = {k: v for k, v in EXAMPLE_CONFIG.items() if k != "stopper"}
        assert cli.main(["simulate", str(write_config(tmp_path, config)), "--out", str(tmp_path / "o")]) == 1
        assert "stopper" in capsys.readouterr().err

    def test_unknown_key(self, tmp_path, capsys):
        config = {**EXAMPLE_CONFIG, "selector": {"kind": "max_info", "n": 3}}
        assert cli.main(["simulate", str(write_config(tmp_path, config)), "--out", str(tmp_path / "o")]) == 1
        err = capsys.readouterr().err
        assert "$.selector" in err and "'n'" in err

    def test_missing_config(self, tmp_path):
        assert cli.main(["simulate", str(tmp_path / "none.json"), "--out", str(tmp_path / "o")]) == 1

    def test_variable_length_and_bank_file(self, tmp_path):
        cli.main(["generate-bank", "--size", "80", "--seed", "2", "--out", str(tmp_path / "items.csv")])
        config = {
            **EXAMPLE_CONFIG,
            "bank": {"path": "items.csv"},
            "examinees": {"thetas": [-1.0, 0.0, 1.0]},
            "selector": {"kind": "randomesque", "n": 3},
            "stopper": {"kind": "min_error", "threshold": 0.45},
            "output": {"charts": False},
        }
        out = tmp_path / "o"
        assert cli.main(["simulate", str(write_config(tmp_path, config)), "--out", str(out)]) == 0
        assert not (out / "charts").exists()
        people = read_rows(out / "examinees.csv")
        assert [float(r[1]) for r in people[1:]] == [-1.0, 0.0, 1.0]


@pytest.fixture
def result_dir(tmp_path):
    out = tmp_path / "result"
    cli.main(["simulate", str(write_config(tmp_path)), "--out", str(out)])
    return out


class TestPlot:
    def test_item_curve(self, tmp_path, result_dir):
        svg = tmp_path / "curve.svg"
        assert cli.main(["plot", "item-curve", "--bank", str(result_dir / "bank.csv"), "--item", "3", "--out", str(svg)]) == 0
        text = svg.read_text()
        assert text.count("<polyline") == 2 and text.count('class="marker"') == 1
        assert (tmp_path / "curve.csv").exists()

    def test_item_out_of_range(self, tmp_path, result_dir):
        args = ["plot", "item-curve", "--bank", str(result_dir / "bank.csv"), "--item", "100", "--out", str(tmp_path / "x.svg")]
        assert cli.main(args) == 1

    def test_test_progress_all(self, tmp_path, result_dir):
        svg = tmp_path / "progress.svg"
        args = ["plot", "test-progress", "--result", str(result_dir), "--examinee", "4", "--all", "--out", str(svg)]
        assert cli.main(args) == 0
        text = svg.read_text()
        for series in ("theta_hat", "true_theta", "info", "var", "see"):
            assert f'data-series="{series}"' in text
        rows = read_rows(tmp_path / "progress.csv")
        assert len(rows) == 22

    def test_test_progress_bad_examinee(self, tmp_path, result_dir):
        args = ["plot", "test-progress", "--result", str(result_dir), "--examinee", "10", "--out", str(tmp_path / "x.svg")]
        assert cli.main(args) == 1

    def test_not_a_result_dir(self, tmp_path):
        args = ["plot", "test-progress", "--result", str(tmp_path), "--out", str(tmp_path / "x.svg")]
        assert cli.main(args) == 1

    def test_item_exposure_line_by_b(self, tmp_path, result_dir):
        svg = tmp_path / "exposure.svg"
        args = ["plot", "item-exposure", "--result", str(result_dir), "--par", "b", "--style", "line", "--out", str(svg)]
        assert cli.main(args) == 0
        rows = read_rows(tmp_path / "exposure.csv")
        b = [float(r[1]) for r in rows[1:]]
        assert b == sorted(b) and len(b) == 100

    def test_item_exposure_needs_one_source(self, tmp_path, result_dir):
        args = ["plot", "item-exposure", "--out", str(tmp_path / "x.svg")]
        assert cli.main(args) == 1


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "catforge", "generate-bank", "--size", "3", "--out", str(tmp_path / "b.csv")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.strip().endswith("b.csv.manifest.json")
    assert "mean" in proc.stderr

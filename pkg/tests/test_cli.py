import json
import math

import pytest

from randinfo.cli import main


@pytest.fixture
def sigma_file(tmp_path):
    path = tmp_path / "seq.json"
    path.write_text(json.dumps({"family": "polynomial", "alpha": 1.0,
                                "beta": 0.0, "m": 32}))
    return str(path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestRadius:
    def test_json_contract(self, capsys, sigma_file):
        code, out, _ = run_cli(capsys, "radius", "--sigma", sigma_file,
                               "--n", "4", "--seed", "7")
        assert code == 0
        doc = json.loads(out)
        assert doc["sigma_np1"] == pytest.approx(0.2)
        assert doc["sigma_np1"] <= doc["radius"] <= doc["sigma_1"] + 1e-10

    def test_deterministic(self, capsys, sigma_file):
        _, out1, _ = run_cli(capsys, "radius", "--sigma", sigma_file, "--n", "4")
        _, out2, _ = run_cli(capsys, "radius", "--sigma", sigma_file, "--n", "4")
        assert out1 == out2

    def test_m_override(self, capsys, sigma_file):
        code, out, _ = run_cli(capsys, "radius", "--sigma", sigma_file,
                               "--n", "2", "--m", "64")
        assert code == 0
        assert json.loads(out)["m"] == 64


class TestBound:
    def test_ub_main_claimed_probability(self, capsys, sigma_file):
        code, out, _ = run_cli(capsys, "bound", "--name", "ub_main",
                               "--sigma", sigma_file, "--n", "100")
        assert code == 0
        doc = json.loads(out)
        assert doc["claimed_failure_prob"] == pytest.approx(2 * math.exp(-1))

    def test_gordon_an(self, capsys, sigma_file):
        code, out, _ = run_cli(capsys, "bound", "--name", "gordon_an",
                               "--sigma", sigma_file, "--n", "2")
        assert code == 0
        assert json.loads(out)["value"] == pytest.approx(math.sqrt(math.pi / 2))

    def test_elementary_lb_needs_alpha(self, capsys, sigma_file):
        code, _, err = run_cli(capsys, "bound", "--name", "elementary_lb",
                               "--sigma", sigma_file, "--n", "2")
        assert code == 1
        assert "alpha" in err


class TestErrorsAndExitCodes:
    def test_unknown_flag_is_usage_error(self, capsys, sigma_file):
        code, _, _ = run_cli(capsys, "radius", "--sigma", sigma_file,
                             "--n", "4", "--frobnicate", "1")
        assert code == 1

    def test_unknown_subcommand(self, capsys):
        code, _, _ = run_cli(capsys, "frobnicate")
        assert code == 1

    def test_missing_sigma_file(self, capsys):
        code, _, _ = run_cli(capsys, "radius", "--sigma", "/nonexistent.json", "--n", "2")
        assert code == 1

    def test_numerical_failure_exit_code(self, capsys, tmp_path):
        big = tmp_path / "big.json"
        big.write_text(json.dumps({"family": "polynomial", "alpha": 1.0,
                                   "beta": 0.0, "m": 1_000_000}))
        code, _, err = run_cli(capsys, "radius", "--sigma", str(big), "--n", "500")
        assert code == 2
        assert "numerical failure" in err

    def test_help_exits_zero(self, capsys):
        assert run_cli(capsys, "--help")[0] == 0


class TestMachineReadableSeparation:
    def test_stdout_is_pure_json(self, capsys, sigma_file):
        code, out, _ = run_cli(capsys, "error", "--sigma", sigma_file,
                               "--n", "6", "--k", "3")
        assert code == 0
        json.loads(out)


class TestSweepCommand:
    def write_config(self, tmp_path, **overrides):
        config = {
            "sequence": {"family": "polynomial", "alpha": 1.0, "beta": 0.0},
            "n_list": [2, 4], "m_rule": {"kind": "multiple", "c": 8},
            "trials": 4, "master_seed": 5, "dense_cap": 64}
        config.update(overrides)
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config))
        return str(path)

    def test_writes_csv_and_summary(self, capsys, tmp_path):
        config = self.write_config(tmp_path)
        out_dir = tmp_path / "out"
        code, out, _ = run_cli(capsys, "sweep", "--config", config,
                               "--out", str(out_dir))
        assert code == 0
        doc = json.loads(out)
        assert doc["records"] == 8
        csv = (out_dir / "sweep.csv").read_text().splitlines()
        assert csv[0].startswith("seed,n,m,trial,radius")
        assert len(csv) == 9
        summary = json.loads((out_dir / "sweep_summary.json").read_text())
        assert [c["n"] for c in summary["cells"]] == [2, 4]

    def test_flag_precedence_over_config(self, capsys, tmp_path):
        config = self.write_config(tmp_path)
        out_dir = tmp_path / "out2"
        code, out, _ = run_cli(capsys, "sweep", "--config", config,
                               "--out", str(out_dir), "--trials", "2", "--seed", "9")
        assert code == 0
        assert json.loads(out)["records"] == 4
        rows = (out_dir / "sweep.csv").read_text().splitlines()[1:]
        from randinfo.experiments import trial_seed
        assert rows[0].split(",")[0] == str(trial_seed(9, 2, 0))

    def test_threads_do_not_change_bytes(self, capsys, tmp_path):
        config = self.write_config(tmp_path)
        blobs = set()
        for i, threads in enumerate(("1", "4")):
            out_dir = tmp_path / f"t{i}"
            run_cli(capsys, "sweep", "--config", config, "--out", str(out_dir),
                    "--threads", threads)
            blobs.add((out_dir / "sweep.csv").read_bytes())
        assert len(blobs) == 1


class TestDichotomyCommand:
    def test_report_json(self, capsys, tmp_path):
        code, out, _ = run_cli(capsys, "dichotomy", "--alpha", "0.25", "--n", "2",
                               "--m-list", "32,64", "--trials", "10",
                               "--out", str(tmp_path))
        assert code == 0
        doc = json.loads(out)
        assert [row["m"] for row in doc["rows"]] == [32, 64]
        assert (tmp_path / "dichotomy.json").exists()


class TestConcentrationCommand:
    def test_szarek_json(self, capsys):
        code, out, _ = run_cli(capsys, "concentration", "--check", "szarek",
                               "--n", "8", "--t", "0.1", "--trials", "1000")
        assert code == 0
        doc = json.loads(out)
        assert doc["checks"][0]["verdict"] in ("consistent", "inconclusive")


class TestSelftestCommand:
    def test_determinism_criterion_passes(self, capsys):
        code, out, err = run_cli(capsys, "selftest", "--criteria", "9")
        assert code == 0
        doc = json.loads(out)
        assert doc["passed"] is True
        assert "criterion 9" in err

import json
import math
import shutil
import subprocess

import numpy as np
import pytest

from radplots.cli import main, render
from radplots.schema import (SchemaError, CSV_HEADER, load_summary_json,
                             load_sweep_csv, log_fit_constant, sigma_np1)


def write_summary(path, alpha=1.0, beta=0.0, n_list=(8, 16, 32, 64)):
    cells = []
    for n in n_list:
        s_np1 = (n + 1.0) ** -alpha
        cells.append({"n": n, "m": 64 * n, "trials": 10,
                      "mean_radius": 2.5 * s_np1, "median_radius": 2.4 * s_np1,
                      "q05": 2.0 * s_np1, "q95": 3.0 * s_np1,
                      "mean_error": 4.0 * s_np1, "ratio_opt": 2.5,
                      "ratio_log": 2.5 / math.sqrt(math.log(n + 1.0)),
                      "tail_ratio": 0.01, "sigma_np1": s_np1, "failures": 0})
    doc = {"sequence": {"family": "polynomial", "alpha": alpha, "beta": beta},
           "cells": cells}
    path.write_text(json.dumps(doc, sort_keys=True, indent=2))
    return doc


def write_sweep_csv(path, n_list=(4, 8), trials=5):
    rows = [CSV_HEADER]
    rng = np.random.default_rng(0)
    for n in n_list:
        for t in range(trials):
            radius = 1.5 / (n + 1) * (1 + 0.1 * rng.random())
            rows.append(",".join([
                str(1000 + t), str(n), str(64 * n), str(t), repr(radius),
                repr(1.0 / (n + 1)), repr(radius * 1.4), str(max(1, n // 2)),
                repr(radius * 30), repr(radius * 200), repr(0.0), "true", "0"]))
    path.write_text("\n".join(rows) + "\n")


def write_dichotomy(path):
    doc = {"alpha": 0.25, "beta": 0.0, "n": 4, "eps": 0.5, "trials": 200,
           "master_seed": 1, "rows": [
               {"m": 256, "n_zero": 2, "threshold": 0.5, "frequency": 0.4},
               {"m": 1024, "n_zero": 5, "threshold": 0.5, "frequency": 0.8},
               {"m": 4096, "n_zero": 10, "threshold": 0.5, "frequency": 1.0}]}
    path.write_text(json.dumps(doc, sort_keys=True, indent=2))


def write_concentration(path):
    doc = {"checks": [
        {"name": "szarek", "trials": 1000, "threshold": 0.02,
         "claimed_bound": 0.23, "empirical_freq": 0.05, "upper_conf_95": 0.06,
         "lower_conf_95": 0.04, "verdict": "consistent", "vacuous": False,
         "params": {}},
        {"name": "smin_basic", "trials": 1000, "threshold": 8.0,
         "claimed_bound": 0.1, "empirical_freq": 0.0, "upper_conf_95": 0.003,
         "lower_conf_95": 0.0, "verdict": "inconclusive", "vacuous": False,
         "params": {}}]}
    path.write_text(json.dumps(doc, sort_keys=True, indent=2))


class TestSchema:
    def test_summary_requires_keys(self, tmp_path):
        path = tmp_path / "summary_x.json"
        path.write_text(json.dumps({"sequence": {}, "cells": [{"n": 1}]}))
        with pytest.raises(SchemaError):
            load_summary_json(path)

    def test_csv_header_mismatch(self, tmp_path):
        path = tmp_path / "sweep.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(SchemaError):
            load_sweep_csv(path)

    def test_csv_empty_rejected(self, tmp_path):
        path = tmp_path / "sweep.csv"
        path.write_text(CSV_HEADER + "\n")
        with pytest.raises(SchemaError):
            load_sweep_csv(path)

    def test_csv_round_trip(self, tmp_path):
        path = tmp_path / "sweep.csv"
        write_sweep_csv(path)
        cols = load_sweep_csv(path)
        assert len(cols["radius"]) == 10
        assert cols["realization_ub_holds"][0] == "true"

    def test_sigma_np1_families(self):
        assert sigma_np1({"family": "polynomial", "alpha": 1.0, "beta": 0.0}, 9) == pytest.approx(0.1)
        assert sigma_np1({"family": "exponential", "a": 0.5}, 3) == pytest.approx(0.0625)
        assert sigma_np1({"family": "explicit", "values": [1.0, 0.5]}, 2) == 0.0

    def test_log_fit_constant_recovers_scale(self):
        ref = np.array([1.0, 0.5, 0.25])
        assert log_fit_constant(3.0 * ref, ref) == pytest.approx(3.0, rel=1e-12)


class TestRenderers:
    def test_regimes_three_panels(self, tmp_path):
        for i, alpha in enumerate((0.25, 0.5, 1.0)):
            write_summary(tmp_path / f"summary_case{i}.json", alpha=alpha)
        out = main(["regimes", "--in", str(tmp_path), "--out",
                    str(tmp_path / "regimes.png")])
        assert out == 0
        assert (tmp_path / "regimes.png").stat().st_size > 0

    def test_regimes_deterministic_bytes(self, tmp_path):
        write_summary(tmp_path / "summary_a.json")
        out1 = tmp_path / "fig1.png"
        out2 = tmp_path / "fig2.png"
        assert main(["regimes", "--in", str(tmp_path), "--out", str(out1)]) == 0
        assert main(["regimes", "--in", str(tmp_path), "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_dichotomy_curve(self, tmp_path):
        write_dichotomy(tmp_path / "dichotomy.json")
        assert main(["dichotomy", "--in", str(tmp_path), "--out",
                     str(tmp_path / "d.png")]) == 0
        assert (tmp_path / "d.png").stat().st_size > 0

    def test_bounds_scatter(self, tmp_path):
        write_sweep_csv(tmp_path / "sweep_case.csv")
        assert main(["bounds-scatter", "--in", str(tmp_path), "--out",
                     str(tmp_path / "b.png")]) == 0

    def test_concentration_bars(self, tmp_path):
        write_concentration(tmp_path / "concentration_all.json")
        assert main(["concentration", "--in", str(tmp_path), "--out",
                     str(tmp_path / "c.png")]) == 0


class TestCliErrors:
    def test_missing_inputs_exit_2(self, tmp_path):
        assert main(["regimes", "--in", str(tmp_path), "--out",
                     str(tmp_path / "x.png")]) == 2

    def test_empty_csv_nonzero_exit(self, tmp_path):
        (tmp_path / "sweep.csv").write_text("")
        assert main(["bounds-scatter", "--in", str(tmp_path), "--out",
                     str(tmp_path / "x.png")]) == 2

    def test_schema_mismatch_exit_2(self, tmp_path):
        (tmp_path / "summary_bad.json").write_text(json.dumps({"cells": []}))
        assert main(["regimes", "--in", str(tmp_path), "--out",
                     str(tmp_path / "x.png")]) == 2

    def test_unknown_kind_is_usage_error(self, tmp_path):
        assert main(["violin", "--in", str(tmp_path), "--out", "x.png"]) == 1


@pytest.mark.skipif(shutil.which("randinfo") is None,
                    reason="primary CLI not installed")
class TestAgainstPrimaryCli:
    def test_end_to_end_from_primary_outputs(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({
            "sequence": {"family": "polynomial", "alpha": 1.0, "beta": 0.0},
            "n_list": [2, 4], "m_rule": {"kind": "multiple", "c": 16},
            "trials": 4, "master_seed": 3, "dense_cap": 32}))
        out_dir = tmp_path / "out"
        subprocess.run(["randinfo", "sweep", "--config", str(config), "--out",
                        str(out_dir), "--name", "sweep_small"], check=True,
                       capture_output=True)
        subprocess.run(["randinfo", "dichotomy", "--alpha", "0.25", "--n", "2",
                        "--m-list", "32,64", "--trials", "5", "--out",
                        str(out_dir)], check=True, capture_output=True)
        assert main(["regimes", "--in", str(out_dir), "--out",
                     str(tmp_path / "r.png")]) == 0
        assert main(["dichotomy", "--in", str(out_dir), "--out",
                     str(tmp_path / "d.png")]) == 0
        assert main(["bounds-scatter", "--in", str(out_dir), "--out",
                     str(tmp_path / "s.png")]) == 0

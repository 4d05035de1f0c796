import io
import json
import os

import pandas as pd
import pytest
import yaml

import main
from graph import SimulationWorkflow
from group_testing.experiments import CURVE_COLUMNS, ExperimentConfig
from group_testing.oracle import EnumerationCaps
from tools.simulation import SimulationTool
from utils.utils import config_hash, load_config

FIGURE1_HEADER = "theta,counting_bound,capacity,dd_rate,comp_max_rate"

SIMULATE_ARGS = [
    "simulate",
    "--n", "1000",
    "--k", "31",
    "--decoder", "COMP",
    "--tests", "200,400,600",
    "--trials", "100",
    "--seed", "7",
]


def _table(text):
    return pd.read_csv(io.StringIO(text)).set_index("quantity")


class TestRates:
    def test_theta_half(self, capsys):
        assert main.main(["rates", "--theta", "0.5"]) == 0
        table = _table(capsys.readouterr().out)
        assert round(table.loc["capacity", "value"], 3) == 0.531
        assert table.loc["capacity", "nu"] == 1.0
        assert table.loc["capacity", "regime"] == "first-term"

    def test_counting_regime(self, capsys):
        assert main.main(["rates", "--theta", "0.2"]) == 0
        table = _table(capsys.readouterr().out)
        assert table.loc["capacity", "value"] == 1.0

    def test_scale(self, capsys):
        assert main.main(["rates", "--n", "10000", "--k", "100"]) == 0
        table = _table(capsys.readouterr().out)
        assert table.loc["T_COMP", "value"] == pytest.approx(2503.9, rel=1e-3)
        for quantity in ("T_star", "T_typ", "T_SSS", "capacity", "dd_rate"):
            assert quantity in table.index

    def test_json_format(self, capsys):
        assert main.main(["rates", "--theta", "0.2", "--format", "json"]) == 0
        rows = json.loads(capsys.readouterr().out)
        capacity = next(r for r in rows if r["quantity"] == "capacity")
        assert capacity["value"] == pytest.approx(1.0)

    def test_save(self, output_dir, capsys):
        assert main.main(["rates", "--theta", "0.5", "--out", output_dir]) == 0
        assert os.path.exists(os.path.join(output_dir, "rates.csv"))
        assert os.path.exists(os.path.join(output_dir, "manifest.json"))

    def test_missing_arguments(self, capsys):
        assert main.main(["rates"]) == 1

    def test_exclusive_density_flags(self):
        with pytest.raises(SystemExit) as info:
            main.main(["rates", "--n", "100", "--k", "5", "--p", "0.1", "--nu", "1"])
        assert info.value.code == 1


class TestUsage:
    def test_missing_subcommand(self):
        with pytest.raises(SystemExit) as info:
            main.main([])
        assert info.value.code == 1

    def test_bad_number(self):
        with pytest.raises(SystemExit) as info:
            main.main(["rates", "--theta", "meio"])
        assert info.value.code == 1

    def test_seed_out_of_range(self):
        with pytest.raises(SystemExit) as info:
            main.main(["simulate", "--n", "10", "--k", "2", "--seed", "-1"])
        assert info.value.code == 1


class TestSimulate:
    def test_minimal_run(self, output_dir, capsys):
        assert main.main(SIMULATE_ARGS + ["--out", output_dir]) == 0
        curve = pd.read_csv(os.path.join(output_dir, "curve.csv"))
        assert list(curve.columns) == CURVE_COLUMNS
        assert curve["T"].tolist() == [200, 400, 600]
        assert (curve["trials"] == 100).all()
        for name in ("curve.json", "threshold.json", "manifest.json"):
            assert os.path.exists(os.path.join(output_dir, name))
        assert "curva:" in capsys.readouterr().out

    def test_byte_identical_reruns(self, tmp_path):
        first, second = tmp_path / "a", tmp_path / "b"
        assert main.main(SIMULATE_ARGS + ["--out", str(first)]) == 0
        assert main.main(SIMULATE_ARGS + ["--out", str(second)]) == 0
        assert (first / "curve.csv").read_bytes() == (second / "curve.csv").read_bytes()

    def test_config_file_with_overrides(self, tmp_path, capsys):
        run_file = tmp_path / "run.yaml"
        run_file.write_text("n: 200\nk: 4\nseed: 3\ntests: [20, 40]\ntrials: 10\n", encoding="utf-8")
        out = tmp_path / "out"
        code = main.main(
            ["simulate", "--config", str(run_file), "--trials", "15", "--out", str(out), "--format", "json"]
        )
        assert code == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["master_seed"] == 3
        manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["config"]["trials"] == 15

    def test_sss_rejected_at_scale(self, capsys):
        code = main.main(["simulate", "--decoder", "sss", "--n", "100000", "--k", "10", "--seed", "1"])
        assert code == 1
        assert "SSS" in capsys.readouterr().err

    def test_all_errors_listed(self, capsys):
        code = main.main(["simulate", "--n", "10", "--k", "20", "--trials", "0", "--seed", "1"])
        assert code == 1
        err = capsys.readouterr().err
        assert "k deve estar" in err and "trials" in err

    def test_invalid_config_file(self, tmp_path):
        run_file = tmp_path / "run.yaml"
        run_file.write_text("- apenas\n- uma lista\n", encoding="utf-8")
        assert main.main(["simulate", "--config", str(run_file)]) == 1

    def test_missing_config_file(self, tmp_path):
        assert main.main(["simulate", "--config", str(tmp_path / "nada.yaml")]) == 2

    def test_drawn_seed_is_printed(self, output_dir, capsys):
        code = main.main(
            ["simulate", "--n", "50", "--k", "2", "--tests", "10", "--trials", "2", "--out", output_dir]
        )
        assert code == 0
        assert "SEMENTE SORTEADA" in capsys.readouterr().err


class TestWorkflow:
    def test_manifest_hash_matches_canonical_config(self, output_dir):
        run_config = {"n": 300, "k": 3, "tests": [30, 60], "trials": 10, "seed": 11}
        state = SimulationWorkflow().run(run_config, output_dir=output_dir)
        expected = config_hash(ExperimentConfig.from_dict(run_config).to_dict())
        assert state["config_hash"] == expected
        with open(state["manifest_file_path"], encoding="utf-8") as f:
            manifest = json.load(f)
        assert manifest["config_hash"] == expected
        assert manifest["master_seed"] == 11
        assert set(manifest["output_files"]) == {
            "curve_csv_path",
            "curve_json_path",
            "threshold_file_path",
        }

    def test_hash_ignores_spelling(self, tmp_path):
        a = SimulationWorkflow().run(
            {"n": 300, "k": 3, "tests": [30, 60], "trials": 10, "seed": 11},
            output_dir=str(tmp_path / "a"),
        )
        b = SimulationWorkflow().run(
            {"seed": 11, "trials": 10.0, "t_grid": [30, 60], "k": 3, "n": 300},
            output_dir=str(tmp_path / "b"),
        )
        assert a["config_hash"] == b["config_hash"]

    def test_oracle_caps_come_from_parameters(self, tmp_path):
        parameters = load_config()
        parameters["oracle"]["max_n_fixed_k"] = 8
        params_file = tmp_path / "parameters.yaml"
        params_file.write_text(yaml.safe_dump(parameters), encoding="utf-8")
        tool = SimulationTool(
            {"n": 12, "k": 2, "tests": [8], "seed": 1}, config_path=str(params_file)
        )
        assert tool.experiment.oracle_caps == EnumerationCaps(max_n_fixed_k=8)

    def test_threshold_summary(self, output_dir):
        state = SimulationWorkflow().run(
            {"n": 100, "k": 2, "tests": [0, 200], "trials": 20, "seed": 1},
            output_dir=output_dir,
        )
        thresholds = state["thresholds"]
        assert thresholds["level"] == 0.5
        assert 0 <= thresholds["empirical"]["COMP"]["T"] <= 200
        assert thresholds["exact_comp"]["T_grid"] == [0, 200]


class TestFigure1:
    def test_golden_csv(self, output_dir, capsys):
        assert main.main(["figure1", "--out", output_dir]) == 0
        with open(os.path.join(output_dir, "figure1.csv"), encoding="utf-8") as f:
            lines = f.read().splitlines()
        assert lines[0] == FIGURE1_HEADER
        assert lines[1] == "0.01,1,1,0.530738,0.52543"
        assert len(lines) == 100
        table = pd.read_csv(os.path.join(output_dir, "figure1.csv"))
        assert table.shape == (99, 5)
        assert capsys.readouterr().out.splitlines()[0] == FIGURE1_HEADER

    def test_custom_grid(self, output_dir, capsys):
        assert main.main(
            ["figure1", "--grid-start", "0.1", "--grid-stop", "0.9", "--grid-points", "9", "--out", output_dir]
        ) == 0
        table = pd.read_csv(os.path.join(output_dir, "figure1.csv"))
        assert table["theta"].tolist() == pytest.approx([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])

    def test_invalid_grid(self):
        assert main.main(["figure1", "--grid-start", "0.0"]) == 1

    def test_output_dir_from_environment(self, tmp_path, monkeypatch):
        target = tmp_path / "from_env"
        monkeypatch.setenv("BGT_OUTPUT_DIR", str(target))
        assert main.main(["figure1"]) == 0
        assert (target / "figure1.csv").exists()


class TestOracleCheck:
    def test_passes(self, output_dir, capsys):
        code = main.main(["oracle-check", "--seeds", "40", "--seed", "0", "--out", output_dir])
        assert code == 0
        out = capsys.readouterr().out
        assert "comp_maximal: 40 verificados, 0 violações" in out
        with open(os.path.join(output_dir, "oracle_check.json"), encoding="utf-8") as f:
            report = json.load(f)
        assert report["passed"] is True
        assert set(report["checked"]) >= {"comp_maximal", "sss_exact", "sandwich_argument"}

    def test_mutant_fails(self, output_dir, monkeypatch, mutant_comp, capsys):
        monkeypatch.setitem(
            main.COMMANDS,
            "oracle-check",
            lambda args: main.cmd_oracle_check(args, comp_decoder=mutant_comp),
        )
        code = main.main(["oracle-check", "--seeds", "60", "--seed", "11", "--out", output_dir])
        assert code == 3
        assert "comp_maximal" in capsys.readouterr().err

    def test_cap_error(self):
        assert main.main(["oracle-check", "--max-n", "20", "--seed", "0"]) == 1

    @pytest.mark.slow
    def test_default_run(self, output_dir):
        assert main.main(["oracle-check", "--seed", "0", "--out", output_dir]) == 0

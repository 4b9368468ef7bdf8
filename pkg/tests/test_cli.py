import json
from pathlib import Path

import pytest

from gridcredit.cli import main


def run_cli(args):
    return main([str(a) for a in args])


@pytest.fixture(scope="module")
def config_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("configs")
    assert run_cli(["gridgen", "--seed", 1, "--complexity", "simple",
                    "--count", 2, "--out", out]) == 0
    assert run_cli(["gridgen", "--seed", 10001, "--complexity", "complex",
                    "--count", 1, "--out", out]) == 0
    return out


class TestGridgen:
    def test_writes_configs_and_manifest(self, config_dir):
        files = sorted(p.name for p in config_dir.glob("*.json"))
        assert "manifest.json" in files
        assert len([f for f in files if f != "manifest.json"]) == 3
        manifest = json.loads((config_dir / "manifest.json").read_text())
        assert manifest["toolkit_version"]
        assert manifest["config_set_hash"]

    def test_validate_passes(self, config_dir, capsys):
        assert run_cli(["validate", config_dir]) == 0
        assert "3/3 configs valid" in capsys.readouterr().out

    def test_validate_catches_corruption(self, tmp_path, config_dir):
        bad_dir = tmp_path / "bad"
        bad_dir.mkdir()
        src = next(p for p in config_dir.glob("*.json") if p.name != "manifest.json")
        data = json.loads(src.read_text())
        data["targets"][0]["x"] = data["targets"][1]["x"]
        data["targets"][0]["y"] = data["targets"][1]["y"]
        (bad_dir / "bad.json").write_text(json.dumps(data))
        assert run_cli(["validate", bad_dir]) == 1


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory, config_dir):
    out = tmp_path_factory.mktemp("run")
    code = run_cli(["run", "--agent", "ibl-equal", "--defaults", "simple",
                    "--configs", config_dir, "--out", out,
                    "--episodes", 4, "--runs", 2, "--seed", 3,
                    "--only-condition", "simple"])
    assert code == 0
    return out


class TestRun:
    def test_outputs(self, run_dir):
        assert (run_dir / "steps.csv").exists()
        assert (run_dir / "summary.csv").exists()
        assert (run_dir / "manifest.json").exists()
        summary = (run_dir / "summary.csv").read_text().strip().splitlines()
        assert len(summary) == 1 + 2 * 2 * 4  # header + configs x runs x episodes

    def test_param_file_round_trip(self, run_dir, config_dir, tmp_path):
        params = json.loads((run_dir / "params.json").read_text())
        params_file = tmp_path / "params.json"
        params_file.write_text(json.dumps(params))
        out = tmp_path / "rerun"
        code = run_cli(["run", "--agent", "ibl-equal", "--params", params_file,
                        "--configs", config_dir, "--out", out,
                        "--episodes", 2, "--runs", 1, "--seed", 3])
        assert code == 0

    def test_kind_mismatch_rejected(self, run_dir, config_dir, tmp_path):
        params_file = tmp_path / "p.json"
        params_file.write_text((run_dir / "params.json").read_text())
        assert run_cli(["run", "--agent", "q-learning", "--params", params_file,
                        "--configs", config_dir, "--out", tmp_path / "x",
                        "--episodes", 1]) == 2


class TestMetricsCommand:
    def test_metrics_and_plots(self, config_dir, run_dir, tmp_path):
        out = tmp_path / "metrics"
        code = run_cli(["metrics", "--steps", f"equal={run_dir / 'steps.csv'}",
                        "--configs", config_dir, "--out", out, "--plots"])
        assert code == 0
        assert (out / "equal_episodes.csv").exists()
        assert (out / "equal_curves.csv").exists()
        assert (out / "condition_summary.csv").exists()
        svgs = sorted(p.name for p in out.glob("*.svg"))
        assert "pmax_simple.svg" in svgs and "poptimal_simple.svg" in svgs

    def test_plots_deterministic(self, config_dir, run_dir, tmp_path):
        out1, out2 = tmp_path / "m1", tmp_path / "m2"
        for out in (out1, out2):
            run_cli(["metrics", "--steps", f"equal={run_dir / 'steps.csv'}",
                     "--configs", config_dir, "--out", out, "--plots"])
        assert (out1 / "pmax_simple.svg").read_bytes() == (out2 / "pmax_simple.svg").read_bytes()
        assert (out1 / "equal_curves.csv").read_bytes() == (out2 / "equal_curves.csv").read_bytes()

    def test_reference_diffs(self, config_dir, run_dir, tmp_path):
        ref = tmp_path / "ref.csv"
        ref.write_text("condition,pmax,poptimal\nsimple,0.8,0.14\n")
        out = tmp_path / "mref"
        run_cli(["metrics", "--steps", f"equal={run_dir / 'steps.csv'}",
                 "--configs", config_dir, "--out", out, "--reference", ref])
        rows = (out / "condition_summary.csv").read_text().strip().splitlines()
        assert rows[0] == "label,condition,pmax,poptimal,pmax_diff,poptimal_diff"
        assert rows[1].split(",")[4] != ""


class TestSearchCommand:
    def test_search_outputs(self, config_dir, tmp_path):
        out = tmp_path / "search"
        code = run_cli(["search", "--agent", "q-learning", "--trials", 2,
                        "--seed", 1, "--configs", config_dir, "--subset", 1,
                        "--episodes", 2, "--out", out])
        assert code == 0
        best = json.loads((out / "best_params.json").read_text())
        assert best["kind"] == "q-learning"
        trials = (out / "trials.csv").read_text().strip().splitlines()
        assert len(trials) == 3  # header + 2 trials


class TestDispatcher:
    def test_unknown_flag_exits_nonzero(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["run", "--bogus"])
        assert excinfo.value.code != 0

    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["--version"])
        assert excinfo.value.code == 0

import json

import pytest

from phmlab.cli import main


def test_run_scenario_fails_on_negative_witness(capsys):
    code = main(["run", "--scenario", "skewed_fibration", "--checks", "phm,tension", "--points", "40", "--seed", "7"])
    assert code == 1
    doc = json.loads(capsys.readouterr().out)
    assert [c["verdict"] for c in doc["checks"]] == ["fail", "fail"]


def test_run_passing_scenario_exit_zero(capsys):
    assert main(["run", "--scenario", "sasakian_r3", "--checks", "phm,normality,classify", "--points", "30"]) == 0
    assert json.loads(capsys.readouterr().out)["scenario"] == "sasakian_r3"


def test_config_file_and_out(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenario": "catalog:hopf", "checks": ["phwc"], "points": 20, "seed": 1}))
    out = tmp_path / "report.txt"
    assert main(["run", "--config", str(cfg), "--format", "text", "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    assert out.read_text().startswith("scenario hopf  seed 1  points 20")


def test_param_flag(capsys):
    # the check verifies the implication; the defect itself is in the details
    assert main(["run", "--scenario", "warped_twist", "--param", "c=2", "--checks", "superminimal",
                 "--points", "10"]) == 0
    details = json.loads(capsys.readouterr().out)["checks"][0]["details"]
    assert details["superminimality_plus"] == pytest.approx(4.0)
    assert details["implication_holds"] is True


@pytest.mark.parametrize("argv", [
    ["run", "--scenario", "nope"],
    ["run", "--scenario", "hopf", "--checks", "bogus"],
    ["run", "--scenario", "hopf", "--checks", ","],
    ["run", "--scenario", "flat_projection", "--param", "n=7"],
    ["run", "--scenario", "hopf", "--param", "oops"],
    ["run", "--scenario", "hopf", "--tol", "1", "--fail-threshold", "0.5"],
    ["run", "--config", "/nonexistent/cfg.json"],
    ["run"],
    ["catalog", "show", "nope"],
    ["frobnicate"],
])
def test_usage_errors_exit_two(argv, capsys):
    assert main(argv) == 2
    assert capsys.readouterr().err


def test_bad_json_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{not json")
    assert main(["run", "--config", str(cfg)]) == 2
    assert "invalid JSON" in capsys.readouterr().err


def test_engine_error_exit_three(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenario": {"inline": {
        "coords": ["x", "y", "z"], "metric": [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]],
        "box": [[0.7, 2.0], [-1, 1], [-1, 1]],
        "target": {"coords": ["u", "v"], "metric": [["1", "0"], ["0", "1"]]},
        "map": ["sqrt(x-0.8)", "y"]}}, "checks": ["phwc"], "points": 50}))
    assert main(["run", "--config", str(cfg)]) == 3
    assert "engine error" in capsys.readouterr().err


def test_catalog_list(capsys):
    assert main(["catalog", "list"]) == 0
    ids = [ln.split()[0] for ln in capsys.readouterr().out.splitlines()]
    assert ids[0] == "flat_projection" and len(ids) == 11


def test_catalog_show(capsys):
    assert main(["catalog", "show", "warped_twist"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["param_ranges"]["c"] == {"default": 1.0, "min": 0.5, "max": 3.0}
    assert doc["expected"]["superminimal"] is False

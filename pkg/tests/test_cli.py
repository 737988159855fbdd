import json
import math

import pandas as pd
import pytest

from common.errors import ArtifactIOError, ConfigError, InvalidLadderError
from gammalab import __version__
from gammalab.cli import COLUMNS, build_parser, flag_overrides, main
from gammalab.config import DEFAULTS, parse_config, parse_ladder
from gammalab.gridfn import load_text, make_tent


def read_results(path):
    return pd.read_csv(path, comment="#")


# ============================================================================
# Config
# ============================================================================

def test_parse_config_defaults():
    plan = parse_config("scan")
    assert plan.ladder == (0.1, 0.01, 0.001)
    assert plan.seed == 0
    assert plan.nodes == 16
    assert plan.effective["profile.kind"] == "indicator"
    assert set(plan.effective) == set(DEFAULTS)


def test_parse_config_overrides_win(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# 설정\nprofile.kind=compact_bump\nrun.seed=5  # 주석\n", encoding="utf-8")
    plan = parse_config("kappa", path, {"run.seed": "9"})
    assert plan.values["profile.kind"] == "compact_bump"
    assert plan.seed == 9
    assert plan.opt.seed == 9


@pytest.mark.parametrize("overrides", [
    {"bogus.key": "1"},
    {"fn.name": "zigzag"},
    {"run.seed": "-1"},
    {"opt.nodes": "0"},
    {"quad.far_field_cutoff_policy": "nearest"},
    {"profile.normalize": "maybe"},
])
def test_parse_config_rejects(overrides):
    with pytest.raises(ConfigError):
        parse_config("eval", overrides=overrides)


def test_parse_config_rejects_unknown_command():
    with pytest.raises(ConfigError):
        parse_config("optimize")


def test_config_file_duplicate_key(tmp_path):
    path = tmp_path / "dup.cfg"
    path.write_text("profile.p=1\nprofile.p=2\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        parse_config("scan", path)


def test_missing_config_file(tmp_path):
    with pytest.raises(ArtifactIOError):
        parse_config("scan", tmp_path / "none.cfg")


def test_parse_ladder_forms():
    assert parse_ladder("0.1, 0.05") == [0.1, 0.05]
    assert parse_ladder("geometric:0.1:0.5:3") == pytest.approx([0.1, 0.05, 0.025])
    assert parse_ladder("log:0.1:2") == pytest.approx([0.1, 0.1 / 3.0])
    with pytest.raises(ConfigError):
        parse_ladder("geometric:0.1")
    with pytest.raises(InvalidLadderError):
        parse_ladder("0.01,0.1")


def test_plan_builds_functions_and_profiles():
    plan = parse_config("eval", overrides={"fn.name": "tent", "fn.c": "0.25", "profile.kind": "saturating_power"})
    tent = plan.build_function()
    assert tent.x.tolist() == [0.0, 0.25, 1.0]
    assert plan.build_profile().normalized
    raw = parse_config("eval", overrides={"profile.scale": "1", "profile.normalize": "false"})
    assert not raw.build_profile().normalized
    assert not raw.quad.require_normalized


def test_build_base_staircase_uses_profile_jump():
    plan = parse_config("recover", overrides={"run.base": "staircase", "run.base_delta": "0.1"})
    indicator_base = plan.build_base(plan.build_profile())
    assert indicator_base.jumps.tolist() == pytest.approx([0.1] * 9)
    compact_plan = parse_config("recover", overrides={"run.base": "staircase", "profile.kind": "compact_bump"})
    compact_base = compact_plan.build_base(compact_plan.build_profile())
    assert compact_base.jumps[0] == pytest.approx(0.2)


# ============================================================================
# Flags
# ============================================================================

def test_flag_overrides_map_to_keys():
    args = build_parser().parse_args(["eval", "--delta", "0.05", "--fn", "tent", "--seed", "3", "--set", "opt.cooling=0.9"])
    overrides = flag_overrides(args)
    assert overrides["ladder.spec"] == "0.05"
    assert overrides["fn.name"] == "tent"
    assert overrides["run.seed"] == "3"
    assert overrides["opt.cooling"] == "0.9"


def test_fn_flag_path_becomes_file():
    args = build_parser().parse_args(["eval", "--fn", "data/u.fn"])
    overrides = flag_overrides(args)
    assert overrides["fn.name"] == "file"
    assert overrides["fn.path"] == "data/u.fn"


def test_delta_and_ladder_conflict(tmp_path):
    out = tmp_path / "conflict"
    code = main(["scan", "--delta", "0.1", "--ladder", "0.1,0.01", "--out", str(out)])
    assert code == 2
    record = json.loads((out / "error.json").read_text(encoding="utf-8"))
    assert record["error"] == "config"
    assert record["exit_code"] == 2


def test_unknown_set_key_exit_code(tmp_path):
    assert main(["scan", "--set", "quad.order=4", "--out", str(tmp_path)]) == 2
    assert (tmp_path / "error.json").exists()


def test_invalid_ladder_exit_code(tmp_path):
    assert main(["scan", "--ladder", "0.01,0.1", "--out", str(tmp_path)]) == 6


# ============================================================================
# Runs
# ============================================================================

def test_scan_writes_artifacts(tmp_path):
    code = main(["scan", "--ladder", "0.1,0.01", "--out", str(tmp_path)])
    assert code == 0
    text = (tmp_path / "results.csv").read_text(encoding="utf-8")
    lines = text.splitlines()
    assert lines[0] == f"# gammalab {__version__}"
    assert lines[1] == "# command=scan"
    assert "# ladder.spec=0.1,0.01" in lines
    assert not any(line.startswith("# run.out=") for line in lines)
    frame = read_results(tmp_path / "results.csv")
    assert list(frame.columns) == COLUMNS["scan"]
    assert frame["energy"].tolist() == pytest.approx([0.6697415, 1.0 - 0.01 + 0.01 * math.log(0.01)], rel=1e-6)
    summary = json.loads((tmp_path / "summary.json").read_text(encoding="utf-8"))
    assert summary["command"] == "scan"
    assert "run.out" not in summary["config"]
    assert (tmp_path / "summary.md").read_text(encoding="utf-8").startswith("# gamma-lab 실행 요약")
    assert (tmp_path / "input.fn").exists()
    assert (tmp_path / "run.log").exists()


def test_function_artifacts_carry_config_header(tmp_path):
    assert main(["eval", "--fn", "tent", "--delta", "0.1", "--out", str(tmp_path)]) == 0
    expected = (tmp_path / "results.csv").read_text(encoding="utf-8").splitlines()[:3]
    assert expected[:2] == [f"# gammalab {__version__}", "# command=eval"]
    for name in ("input.fn", "input_samples.csv"):
        lines = (tmp_path / name).read_text(encoding="utf-8").splitlines()
        assert lines[:3] == expected
        assert "# fn.name=tent" in lines
        assert not any(line.startswith("# run.out=") for line in lines)
    restored = load_text(tmp_path / "input.fn")
    assert restored.same_as(make_tent((0.0, 1.0)))
    samples = read_results(tmp_path / "input_samples.csv")
    assert list(samples.columns) == ["x", "value"]


def test_check_profile_summary(tmp_path):
    assert main(["check-profile", "--profile", "indicator", "--p", "1", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "summary.json").read_text(encoding="utf-8"))["summary"]
    assert summary["normalization"] == pytest.approx(0.5, abs=1e-9)
    assert summary["passed"] is True
    frame = read_results(tmp_path / "results.csv")
    assert frame["passed"].all()


def test_check_profile_reports_unnormalized(tmp_path):
    code = main(["check-profile", "--set", "profile.scale=1", "--out", str(tmp_path)])
    assert code == 0
    summary = json.loads((tmp_path / "summary.json").read_text(encoding="utf-8"))["summary"]
    assert summary["passed"] is False
    assert summary["normalized_scale"] == pytest.approx(0.5)


def test_eval_reports_divergence(tmp_path):
    assert main(["eval", "--fn", "heaviside", "--delta", "0.5", "--out", str(tmp_path)]) == 0
    frame = read_results(tmp_path / "results.csv")
    assert frame["diverges"].tolist() == [True]
    assert frame["certificate_location"].tolist() == [0.5]
    assert frame["energy"].tolist() == [math.inf]


def test_eval_is_byte_identical_across_runs(tmp_path):
    argv = ["eval", "--fn", "tent", "--ladder", "0.1,0.05", "--seed", "42"]
    assert main(argv + ["--out", str(tmp_path / "a")]) == 0
    assert main(argv + ["--out", str(tmp_path / "b")]) == 0
    for name in ("results.csv", "summary.json", "summary.md", "input.fn"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_xlsx_export(tmp_path):
    assert main(["scan", "--ladder", "0.1", "--xlsx", "--out", str(tmp_path)]) == 0
    config = pd.read_excel(tmp_path / "results.xlsx", sheet_name="config", engine="openpyxl")
    assert "profile.kind" in config["key"].tolist()
    rows = dict(zip(config["key"], config["value"]))
    assert rows["version"] == __version__
    assert rows["command"] == "scan"
    results = pd.read_excel(tmp_path / "results.xlsx", sheet_name="results", engine="openpyxl")
    assert list(results.columns) == COLUMNS["scan"]


def test_invariants_command(tmp_path):
    code = main(["invariants", "--delta", "0.1", "--set", "run.invariant_cases=3", "--out", str(tmp_path)])
    assert code == 0
    frame = read_results(tmp_path / "results.csv")
    assert list(frame.columns) == COLUMNS["invariants"]
    assert frame["passed"].all()


@pytest.mark.slow
def test_kappa_runs_are_reproducible(tmp_path):
    argv = [
        "kappa", "--profile", "compact_bump", "--delta", "0.1", "--seed", "42", "--nodes", "2", "--restarts", "1",
        "--set", "opt.stages=2", "--set", "opt.moves_per_stage=5",
    ]
    assert main(argv + ["--out", str(tmp_path / "a")]) == 0
    assert main(argv + ["--out", str(tmp_path / "b")]) == 0
    first = (tmp_path / "a" / "results.csv").read_bytes()
    assert first == (tmp_path / "b" / "results.csv").read_bytes()
    frame = read_results(tmp_path / "a" / "results.csv")
    assert list(frame.columns) == COLUMNS["kappa"]
    assert frame["best_energy"].tolist() == [0.0]
    assert frame["seed"].tolist() == [42]


@pytest.mark.slow
def test_recover_command(tmp_path):
    argv = ["recover", "--fn", "tent", "--ladder", "0.05", "--set", "run.base=staircase", "--out", str(tmp_path)]
    assert main(argv) == 0
    frame = read_results(tmp_path / "results.csv")
    assert frame["boundary_gap"].tolist()[0] == pytest.approx(0.0, abs=1e-12)
    assert frame["l1_distance"].tolist()[0] <= 0.1
    assert (tmp_path / "recovery_00.fn").exists()

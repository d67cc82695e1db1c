"""
Tests for the command-line interface
"""

from pathlib import Path

import pandas as pd
import pytest

from planner import cli, pipeline

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
STANDING = SCENARIOS / "standing.yaml"


@pytest.fixture
def standing_run(tmp_path):
    code = cli.main(["run", str(STANDING), "--out-dir", str(tmp_path)])
    return code, tmp_path / "standing"


def test_parser_defaults():
    args = cli.build_parser().parse_args(["run", "a.yaml", "b.yaml", "--no-polytope"])
    assert args.scenarios == ["a.yaml", "b.yaml"]
    assert args.no_polytope and not args.no_shin and not args.no_foot_radius
    assert args.jobs is None
    assert args.handler is cli.run_command


def test_parser_requires_a_command():
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args([])


def test_jobs_must_be_positive(tmp_path):
    with pytest.raises(SystemExit):
        cli.main(["run", str(STANDING), "--jobs", "0", "--out-dir", str(tmp_path)])


def test_run_standing_writes_artifacts(standing_run):
    code, out = standing_run
    assert code == pipeline.EXIT_OK
    for name in ("trajectory.csv", "report.json", "torques.csv", "collisions.csv", "base_x.csv"):
        assert (out / name).exists(), name


def test_check_accepts_a_planned_trajectory(standing_run, tmp_path):
    _, out = standing_run
    code = cli.main(["check", str(out / "trajectory.csv"), str(STANDING), "--out-dir", str(tmp_path / "check")])
    assert code == pipeline.EXIT_OK
    assert (tmp_path / "check" / "report.json").exists()


def test_check_rejects_nan(standing_run, tmp_path, capsys):
    _, out = standing_run
    df = pd.read_csv(out / "trajectory.csv")
    df.loc[3, "r_z"] = float("nan")
    broken = tmp_path / "broken.csv"
    df.to_csv(broken, index=False)
    code = cli.main(["check", str(broken), str(STANDING), "--out-dir", str(tmp_path / "check")])
    assert code == pipeline.EXIT_VALIDATION
    assert "SchemaError" in capsys.readouterr().out


def test_check_flags_a_lifted_foot(standing_run, tmp_path):
    _, out = standing_run
    df = pd.read_csv(out / "trajectory.csv")
    df.loc[5, "LF_p_z"] += 0.05
    lifted = tmp_path / "lifted.csv"
    df.to_csv(lifted, index=False)
    code = cli.main(["check", str(lifted), str(STANDING), "--out-dir", str(tmp_path / "check")])
    assert code == pipeline.EXIT_VALIDATION


def test_polytope_dump_grid(tmp_path):
    code = cli.main([
        "polytope-dump", str(STANDING), "--leg", "LH",
        "--l-samples", "10", "--alpha-samples", "5", "--out-dir", str(tmp_path),
    ])
    assert code == pipeline.EXIT_OK
    errors = pd.read_csv(tmp_path / "polytope_errors.csv")
    assert len(errors) == 50
    assert list(errors.columns) == list(pipeline.ERROR_COLUMNS)
    polytopes = pd.read_csv(tmp_path / "polytopes.csv")
    assert set(polytopes["kind"]) == {"morphed", "exact"}
    assert polytopes["sample"].nunique() == 50


def test_polytope_dump_empty_grid(tmp_path):
    code = cli.main(["polytope-dump", str(STANDING), "--l-samples", "0", "--out-dir", str(tmp_path)])
    assert code == pipeline.EXIT_OK
    lines = (tmp_path / "polytope_errors.csv").read_text().strip().splitlines()
    assert lines == [",".join(pipeline.ERROR_COLUMNS)]


def test_polytope_dump_unknown_leg(tmp_path):
    code = cli.main(["polytope-dump", str(STANDING), "--leg", "XX", "--out-dir", str(tmp_path)])
    assert code == pipeline.EXIT_VALIDATION


def test_jacobian_check_on_standing(tmp_path):
    code = cli.main(["jacobian-check", str(STANDING), "--out-dir", str(tmp_path)])
    assert code == pipeline.EXIT_OK
    assert (tmp_path / "jacobian_check.json").exists()

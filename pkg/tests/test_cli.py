import json

import pytest
from click.testing import CliRunner

from cli import cli


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


def test_list_problems(runner):
    result = runner.invoke(cli, ["list-problems", "--format", "json"])
    assert result.exit_code == 0
    names = {row["name"] for row in json.loads(result.stdout)}
    assert {"gp_vortex", "logistic", "strongly_singular"} <= names


def test_solve_logistic(runner):
    result = runner.invoke(cli, ["solve", "--problem", "logistic", "--order", "3", "--p0", "2"])
    assert result.exit_code == 0, result.output
    record = json.loads(result.stdout)
    assert record["theta"]["a1"] == pytest.approx(0.5, abs=1e-8)
    amplitudes = [f["A"] for f in record["factors"] if abs(f["n"]) > 1e-8]
    assert amplitudes == [pytest.approx(-0.5, abs=1e-8)]


def test_solve_text_output(runner):
    result = runner.invoke(cli, ["solve", "--problem", "bell", "--order", "3", "--format", "text"])
    assert result.exit_code == 0, result.output
    assert "factor 1" in result.stdout


def test_unknown_problem_is_a_usage_error(runner):
    result = runner.invoke(cli, ["solve", "--problem", "duffing", "--order", "3"])
    assert result.exit_code == 2
    record = json.loads(result.stderr.strip().splitlines()[-1])
    assert record["error_type"] == "unknown_problem"


def test_order_below_minimum_is_a_usage_error(runner):
    result = runner.invoke(cli, ["solve", "--problem", "logistic", "--order", "2"])
    assert result.exit_code == 2
    assert json.loads(result.stderr.strip().splitlines()[-1])["details"]["min_order"] == 3


def test_curve_needs_orders(runner):
    result = runner.invoke(cli, ["curve", "--problem", "bell", "--orders", ""])
    assert result.exit_code == 2


def test_table_needs_a_sweep(runner):
    result = runner.invoke(cli, ["table"])
    assert result.exit_code == 2


def test_invalid_format_in_config_is_a_usage_error(runner, tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"format": "xml"}))
    result = runner.invoke(cli, ["table", "--config", str(path)])
    assert result.exit_code == 2


def test_config_file_merges_with_flags(runner, tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"problem": "linear_singular", "orders": [2, 3], "epsilons": [1.0], "grid_points": 51}))
    out = tmp_path / "table.csv"
    result = runner.invoke(cli, ["table", "--config", str(path), "--orders", "2", "--out", str(out)])
    assert result.exit_code == 0, result.output
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "k,D"
    assert len(lines) == 2
    assert lines[1].startswith("2,")


def test_curve_csv(runner):
    result = runner.invoke(
        cli, ["curve", "--problem", "linear_singular", "--orders", "2,3", "--eps", "1", "--grid-points", "11"]
    )
    assert result.exit_code == 0, result.output
    lines = result.stdout.strip().splitlines()
    assert lines[0] == "t,defect_k2,defect_k3"
    assert len(lines) == 12


def test_table_csv_is_byte_identical_on_repeat(runner, tmp_path):
    args = ["table", "--problem", "boundary_layer", "--orders", "4,5", "--eps", "1", "--grid-points", "201"]
    first, second = tmp_path / "first.csv", tmp_path / "second.csv"
    assert runner.invoke(cli, [*args, "--out", str(first)]).exit_code == 0
    assert runner.invoke(cli, [*args, "--out", str(second)]).exit_code == 0
    assert first.read_bytes() == second.read_bytes()

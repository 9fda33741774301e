import json

import pytest
from click.testing import CliRunner

from app.main import cli
from utils.report_writer import read_csv


@pytest.fixture
def runner():
    return CliRunner()


def test_inspect_text(runner):
    result = runner.invoke(cli, ["--quiet", "inspect", "--n", "2"])
    assert result.exit_code == 0, result.output
    assert "GR(4,2); poly=[1,1,1]; basis=[(0,1),(3,3)]" in result.output
    assert "units (12)" in result.output
    assert "ideal2 (4)" in result.output


def test_inspect_json(runner):
    result = runner.invoke(cli, ["--quiet", "inspect", "--s", "1", "--n", "2", "--format", "json"])
    assert result.exit_code == 0, result.output
    data = json.loads(result.output)
    assert data["ring"] == "GR(2,2)"
    assert data["size"] == 4
    assert len(data["subsets"]["units"]) == 3


@pytest.mark.parametrize("args", [
    ["--n", "2", "--poly", "1,0,1"],  # x^2 + 1 is reducible mod 2
    ["--n", "2", "--poly", "1,1"],
    ["--n", "2", "--poly", "1,x,1"],
    ["--s", "4"],
])
def test_inspect_rejects_bad_rings(runner, args):
    result = runner.invoke(cli, ["--quiet", "inspect", *args])
    assert result.exit_code == 2


def test_verify_single_ququart(runner, tmp_path):
    out = tmp_path / "verify.json"
    result = runner.invoke(cli, ["--quiet", "verify", "--n", "1", "--out", str(out)])
    assert result.exit_code == 0, result.output
    report = json.loads(out.read_text())
    assert report["passed"]
    assert report["failed"] == []
    checks = report["checks"]["N=1"]
    assert {"ring_two_adic_expansions", "phase_equation", "overlap", "fixtures", "probability_redundancy"} <= set(checks)
    assert max(checks.values()) <= 1e-10
    assert report["config"]["seed"] == 7


@pytest.mark.parametrize("n_text", ["0", "1,4", "1,x"])
def test_verify_rejects_unsupported_n(runner, tmp_path, n_text):
    out = tmp_path / "verify.json"
    result = runner.invoke(cli, ["--quiet", "verify", "--n", n_text, "--out", str(out)])
    assert result.exit_code == 2
    report = json.loads(out.read_text())
    assert report["passed"] is False
    assert report["error"] == "configuration rejected"
    assert report["checks"] == {}


def test_verify_config_error_still_writes_report(runner, tmp_path):
    out = tmp_path / "verify.json"
    result = runner.invoke(cli, ["--quiet", "verify", "--tolerance", "0", "--out", str(out)])
    assert result.exit_code == 2
    report = json.loads(out.read_text())
    assert report["passed"] is False
    assert report["error"] == "configuration rejected"


def test_roundtrip(runner, tmp_path):
    args = ["--quiet", "experiment", "roundtrip", "--n", "1", "--samples", "10"]
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert runner.invoke(cli, [*args, "--out", str(first)]).exit_code == 0
    assert runner.invoke(cli, [*args, "--out", str(second)]).exit_code == 0

    frame = read_csv(first)
    assert list(frame["ensemble"]) == ["pure", "mixed"]
    assert frame["passed"].all()
    assert frame["max_residual_projector"].max() <= 1e-10

    def body(path):
        return [line for line in path.read_text().splitlines() if not line.startswith("#")]
    assert body(first) == body(second)
    assert "# shots are per measurement setup" in first.read_text()


def test_simulate(runner, tmp_path):
    out = tmp_path / "simulate.csv"
    result = runner.invoke(cli, ["--quiet", "experiment", "simulate", "--n", "1", "--shots", "500,2000",
                                 "--repeats", "40", "--out", str(out)])
    assert result.exit_code == 0, result.output
    frame = read_csv(out)
    assert list(frame["shots"]) == [500, 2000]
    assert frame["empirical_mse"].iloc[0] > frame["empirical_mse"].iloc[1]
    assert (frame["cramer_rao"] <= frame["linear_inversion_mse"] + 1e-9).all()


@pytest.mark.parametrize("args", [
    ["--shots", "0"],
    ["--shots", "100,abc"],
    ["--clamp", "0"],
    ["--repeats", "0"],
])
def test_simulate_rejects_bad_options(runner, args, tmp_path):
    result = runner.invoke(cli, ["--quiet", "experiment", "simulate", *args, "--out", str(tmp_path / "s.csv")])
    assert result.exit_code == 2


def test_table3_json(runner, tmp_path):
    out = tmp_path / "table3.json"
    result = runner.invoke(cli, ["--quiet", "experiment", "table3", "--n", "1", "--samples", "5",
                                 "--format", "json", "--out", str(out), "--dump-states"])
    assert result.exit_code == 0, result.output
    report = json.loads(out.read_text())
    assert len(report["rows"]) == 6
    sic = next(row for row in report["rows"] if row["scheme"] == "d=4 SIC-POVM" and row["ensemble"] == "pure")
    assert sic["paper_value"] == 4.24
    assert abs(sic["mean"] - 18 ** 0.5) < 1e-9
    assert report["anchors"]["N=1"]["cramer_rao_maximally_mixed"] == pytest.approx(27 / 8)
    assert report["anchors"]["N=1"]["anchor_ok"] is True
    assert len(report["per_state"]["1 ququart MU-like|mixed"]) == 5
    assert report["config"]["command"] == "table3"

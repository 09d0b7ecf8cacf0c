import json
import subprocess
import sys
from pathlib import Path

import pytest

from qubit_nlb import cli

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_ampdamp(capsys):
    code, out, _ = run(capsys, "analyze", "--family", "ampdamp", "--p", "0.7", "--format", "json")
    rep = json.loads(out)
    assert code == 0
    assert rep["cp"] and not rep["entanglement_breaking"] and rep["nlb_mes"] and not rep["strongly_nlb"]


def test_analyze_depolarizing_presets(capsys):
    code, out, _ = run(capsys, "analyze", "--channel", "depolarizing", "--format", "json")
    rep = json.loads(out)
    assert rep["entanglement_breaking"] and rep["strongly_nlb"]
    # half-strength depolarizing keeps entanglement but still breaks nonlocality strongly
    code, out, _ = run(capsys, "analyze", "--channel", "depolarizing-0.5", "--format", "json")
    rep = json.loads(out)
    assert not rep["entanglement_breaking"] and rep["strongly_nlb"]


def test_analyze_nonunital_example_table(capsys):
    code, out, _ = run(capsys, "analyze", "--channel", "nonunital-snlb", "--format", "table")
    assert code == 0
    assert "strongly NLB            yes" in out
    assert "C-ratio                 0.887347" in out


def test_analyze_inline_and_file(capsys, tmp_path):
    spec = '{"t": [0, 0, 0], "lambda": [1, 1, 1]}'
    code, out, _ = run(capsys, "analyze", "--channel", spec, "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "key,value"
    path = tmp_path / "ch.json"
    path.write_text(spec)
    code, out, _ = run(capsys, "analyze", "--channel", str(path), "--format", "json")
    assert json.loads(out)["choi_M"] == pytest.approx(2)


@pytest.mark.parametrize("argv", [
    ["analyze", "--channel", '{"t": [0, 0'],
    ["analyze", "--channel", "no-such-preset"],
    ["analyze", "--family", "ampdamp"],
    ["analyze"],
    ["sweep", "--family", "extremal", "--format", "json"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and "error" in err


def test_parse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["volume", "--samples", "abc"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["no-such-command"])
    assert exc.value.code == 2


def test_sweep_identity_single_row(capsys):
    code, out, _ = run(capsys, "sweep", "--channel", '{"t": [0, 0, 0], "lambda": [1, 1, 1]}', "--format", "json")
    rows = json.loads(out)["rows"]
    assert code == 0 and len(rows) == 1 and rows[0]["best_M"] == pytest.approx(2, abs=1e-9)


def test_sweep_ampdamp_csv(capsys):
    code, out, _ = run(capsys, "sweep", "--family", "ampdamp", "--start", "0.5", "--stop", "0.7",
                       "--step", "0.1", "--format", "csv")
    lines = out.strip().splitlines()
    assert lines[0] == "p,best_M,lambda,alpha,beta,gamma"
    assert [float(x.split(",")[0]) for x in lines[1:]] == [0.5, 0.6, 0.7]
    assert all(abs(float(x.split(",")[1]) - 1) <= 1e-6 for x in lines[1:])


def test_sweep_qfamily_reports_crossing(capsys):
    code, out, _ = run(capsys, "sweep", "--family", "qfamily", "--start", "0.6", "--stop", "0.65",
                       "--step", "0.05", "--format", "json")
    data = json.loads(out)
    assert 0.615 <= data["crossing"] <= 0.63


def test_sweep_extremal_one_angle_fixed(capsys):
    code, out, _ = run(capsys, "sweep", "--family", "extremal", "--u", "0.5", "--start", "1.0",
                       "--stop", "1.1", "--step", "0.1", "--angle-step", "0.5", "--format", "json")
    data = json.loads(out)
    assert data["parameter"] == "v" and len(data["rows"]) == 2


def test_volume_golden_json(capsys):
    code, out, _ = run(capsys, "volume", "--samples", "1", "--seed", "7", "--format", "json")
    assert code == 0
    assert json.loads(out) == json.loads((GOLDEN / "volume_samples1_seed7.json").read_text())


def test_volume_golden_table(capsys):
    code, out, _ = run(capsys, "volume", "--samples", "1", "--seed", "7", "--format", "table")
    assert out == (GOLDEN / "volume_samples1_seed7.txt").read_text()


def test_volume_scientific_samples_and_out_file(capsys, tmp_path):
    target = tmp_path / "vol.csv"
    code, out, _ = run(capsys, "volume", "--samples", "1e4", "--seed", "3", "--unital",
                       "--format", "csv", "--out", str(target))
    assert code == 0 and out == ""
    rows = dict(line.split(",", 1) for line in target.read_text().strip().splitlines())
    assert rows["samples_drawn"] == "10000" and rows["mode"] == "unital"


def test_piped_output_defaults_to_json():
    proc = subprocess.run([sys.executable, "-m", "qubit_nlb.cli", "volume", "--samples", "1", "--seed", "7"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["seed"] == 7


def test_verify_paper_exit_code_reflects_failures(capsys, monkeypatch):
    from qubit_nlb import checks

    ok = checks.CheckResult("x", "1", "1", "0", True)
    bad = checks.CheckResult("y", "1", "2", "0", False)
    info = checks.CheckResult("z", "1", "2", "0", False, informational=True)
    monkeypatch.setattr(checks, "run_all", lambda **kw: [ok, info])
    code, out, _ = run(capsys, "verify-paper", "--json")
    assert code == 0 and json.loads(out)["passed"]
    monkeypatch.setattr(checks, "run_all", lambda **kw: [ok, bad])
    code, out, _ = run(capsys, "verify-paper", "--format", "table")
    assert code == 1 and "FAIL" in out

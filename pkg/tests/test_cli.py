import json
import math
import subprocess
import sys

import numpy as np
import pytest

from twistorlab import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def machine(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--format", "machine")
    doc = json.loads(out)
    assert doc["schema"] == "twistorlab/1"
    assert doc["exit_code"] == code
    return code, doc["result"]


def test_curvature_round_s4(capsys):
    code, res = machine(capsys, "curvature", "round_s4", "--at", "0,0,0,0")
    assert code == 0
    (pt,) = res["points"]
    assert np.allclose(pt["A"], np.eye(3), atol=1e-9)
    assert np.allclose(pt["B"], 0, atol=1e-9)
    assert pt["s"] == pytest.approx(12.0, abs=1e-8)


def test_curvature_flat_grid(capsys):
    code, res = machine(capsys, "curvature", "flat_torus", "--grid", "2")
    assert code == 0
    assert len(res["points"]) == 16
    for pt in res["points"]:
        assert np.allclose(pt["A"], 0, atol=1e-12) and pt["case"] == "A"


def test_curvature_cp2_adapted(capsys):
    code, res = machine(capsys, "curvature", "cp2_fs", "--at", "0.3,-0.2,0.1,0.4")
    (pt,) = res["points"]
    assert pt["adapted"] and pt["case"] == "B"
    assert pt["x_value"] == pytest.approx(6.0, abs=1e-7)
    assert pt["y_value"] == pytest.approx(0.0, abs=1e-7)


def test_curvature_text_mentions_case(capsys):
    code, out, _ = run(capsys, "curvature", "cp2_fs", "--at", "0,0,0,0")
    assert code == 0 and "case B" in out


def test_check_exit_codes(capsys):
    assert machine(capsys, "check", "flat_torus", "--morphism", "lambda:2")[0] == 0
    assert machine(capsys, "check", "cp2_fs", "--morphism", "const")[0] == 0
    code, res = machine(capsys, "check", "round_s4", "--morphism", "antipodal", "--samples", "8")
    assert code == 1
    assert not res["integrable"]
    assert res["witness"]["component"] == "defect"
    assert res["max"]["defect"] == pytest.approx(2.0)


def test_check_deterministic_for_seed(capsys):
    args = ("check", "round_s4", "--morphism", "const", "--samples", "8", "--seed", "3", "--format", "machine")
    assert run(capsys, *args)[1] == run(capsys, *args)[1]


def test_classify_chart_cases(capsys):
    assert machine(capsys, "classify", "flat_torus")[1]["summary"] == {"A": 1}
    code, res = machine(capsys, "classify", "cp2_fs")
    assert code == 0 and res["points"][0]["case"] == "B"


def test_classify_blocks(capsys):
    code, res = machine(capsys, "classify", "--blocks", "x=0.5,y=1")
    v = res["verdict"]
    assert code == 0 and v["case"] == "C"
    assert v["theta"] == pytest.approx(math.pi / 3, abs=1e-10)


def test_classify_text_matches_machine(capsys):
    _, out, _ = run(capsys, "classify", "--blocks", "x=2,y=1")
    _, res = machine(capsys, "classify", "--blocks", "x=2,y=1")
    assert res["verdict"]["case"] == "D"
    assert "case D" in out


def test_oracle_flat(capsys):
    code, res = machine(capsys, "oracle", "flat_r4", "--morphism", "id", "--samples", "4")
    assert code == 0 and res["agree"]
    assert len(res["deviations"]) == 4
    assert max(d["vertical"] for d in res["deviations"]) <= 1e-12


def test_chern_k3(capsys):
    code, res = machine(capsys, "chern", "--tau", "-16", "--chi", "24")
    assert code == 0
    assert res["three_tau_plus_two_chi"] == 0 and res["obstruction"] is False


def test_chern_inconsistent_c1sq_is_usage_error(capsys):
    code, _, err = run(capsys, "chern", "--tau", "1", "--chi", "3", "--c1sq", "5")
    assert code == 2 and err


def test_gauss_bonnet_s4(capsys):
    code, res = machine(capsys, "gauss-bonnet", "round_s4")
    assert code == 0 and res["converged"]
    assert res["value"] == pytest.approx(4.0, abs=1e-3)


def test_gauss_bonnet_divergent_is_numerical_failure(capsys):
    code, _, err = run(capsys, "gauss-bonnet", "hyperbolic_h4")
    assert code == 3 and err


def test_catalog_list_and_export(capsys, tmp_path):
    code, res = machine(capsys, "catalog", "list")
    names = [e["name"] for e in res["entries"]]
    assert code == 0 and {"flat_r4", "round_s4", "cp2_fs"} <= set(names)
    path = tmp_path / "s4.chart"
    assert cli.main(["catalog", "export", "round_s4", "--out", str(path)]) == 0
    capsys.readouterr()
    assert path.read_text().startswith("[chart]")
    # the exported file is accepted wherever a chart name is
    code, res = machine(capsys, "curvature", str(path), "--at", "0.2,0,0,0")
    assert np.allclose(res["points"][0]["A"], np.eye(3), atol=1e-8)


def test_out_writes_file(capsys, tmp_path):
    path = tmp_path / "k3.json"
    assert cli.main(["chern", "--tau", "-16", "--chi", "24", "--format", "machine", "--out", str(path)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(path.read_text())["command"] == "chern"


@pytest.mark.parametrize("argv", [
    ["curvature", "no_such_chart"],
    ["curvature", "round_s4", "--at", "1,2"],
    ["check", "round_s4", "--morphism", "bogus:1"],
    ["classify", "--blocks", "x=1"],
    ["catalog", "export"],
    ["chern", "--tau", "3"],
    [],
])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "twistorlab", "classify", "--blocks", "x=0,y=0", "--format", "machine"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["verdict"]["case"] == "A"

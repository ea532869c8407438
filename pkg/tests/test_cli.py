import json
import subprocess
import sys

import pytest

from mumops.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_instantons_k3_n6(capsys):
    code, out, _ = run(capsys, "instantons", "--family", "K3-N6", "--truncation", "30")
    assert code == 0
    doc = json.loads(out)["instantons"]
    assert doc["period"] == 6 and doc["denominator"] == 6
    assert doc["scaled"][:6] == ["-42", "-39", "-44", "-39", "-42", "-34"]


def test_dual_instantons_p3(capsys):
    code, out, _ = run(
        capsys, "dual-instantons", "--family", "P3-pullback",
        "--beta", "1", "--nu", "4", "--mu", "-1/4", "--truncation", "52",
    )
    assert code == 0
    doc = json.loads(out)["dual_instantons"]
    assert doc["values"][0] == "-20"
    assert doc["values"][11] == "-3113965536138337597215480"
    assert doc["parameters"] == {"beta": "1", "nu": 4, "mu": "-1/4", "weight": 2}


def test_empty_operator_file(tmp_path, capsys):
    f = tmp_path / "empty.op"
    f.write_text("", encoding="utf-8")
    code, out, err = run(capsys, "yukawa", "--operator-file", str(f))
    assert code != 0 and out == ""
    assert "position 0" in err


def test_operator_file_yukawa(tmp_path, capsys):
    f = tmp_path / "apery.op"
    f.write_text("theta^3 - t*(2*theta+1)*(17*theta^2+17*theta+5) + t^2*(theta+1)^3\n", encoding="utf-8")
    code, out, _ = run(capsys, "yukawa", "--operator-file", str(f), "--truncation", "6")
    coeffs = json.loads(out)["yukawa"]["coefficients"]
    assert code == 0 and list(coeffs.values())[:6] == ["1", "-7", "-59", "-205", "-475", "-882"]


def test_rationals_are_strings(capsys):
    code, out, _ = run(capsys, "frobenius", "--family", "K3-N2", "--truncation", "3", "--quantum")
    hs = json.loads(out)["h"]
    assert code == 0 and len(hs) == 4
    assert all(isinstance(v, str) for h in hs for v in h["coefficients"].values())
    assert hs[3]["coefficients"]["3"] == "-77788384/9"
    code, out, _ = run(capsys, "frobenius", "--family", "K3-BeukersPeters", "--truncation", "4")
    assert json.loads(out)["h"][0]["coefficients"] == {"0": "1", "1": "5", "2": "73", "3": "1445", "4": "33001"}


def test_env_truncation(monkeypatch, capsys):
    monkeypatch.setenv("MUMOPS_TRUNCATION", "5")
    _, out, _ = run(capsys, "mirror-map", "--family", "EC-X0(3)")
    doc = json.loads(out)
    assert doc["t_of_q"]["truncation"] == 5
    assert list(doc["t_of_q"]["coefficients"].values())[:5] == ["0", "1", "-15", "171", "-1679"]
    _, out, _ = run(capsys, "mirror-map", "--family", "EC-X0(3)", "--truncation", "3")
    assert json.loads(out)["t_of_q"]["truncation"] == 3


def test_exactly_one_input(tmp_path, capsys):
    code, _, err = run(capsys, "yukawa")
    assert code == 2 and "exactly one" in err
    f = tmp_path / "x.op"
    f.write_text("theta^2 - t", encoding="utf-8")
    code, _, err = run(capsys, "yukawa", "--family", "K3-N2", "--operator-file", str(f))
    assert code == 2


def test_unknown_family(capsys):
    code, _, err = run(capsys, "catalog", "--family", "nope")
    assert code == 2 and "K3-N2" in err


def test_formats(capsys):
    _, out, _ = run(capsys, "derive-pf", "--family", "EC-X0(6)", "--format", "csv")
    assert out.splitlines()[0] == "key,value"
    assert "matches_catalog,true" in out
    _, out, _ = run(capsys, "derive-pf", "--family", "EC-X0(6)", "--format", "plain")
    assert out.startswith("operator = theta^2")


def test_modular_check_expressions(capsys):
    code, out, _ = run(capsys, "modular-check", "--lhs", "G4(1)*240", "--rhs", "E4(1)")
    assert code == 0 and json.loads(out)["checks"][0]["ok"]
    code, out, _ = run(capsys, "modular-check", "--lhs", "G4(1)", "--rhs", "E4(1)")
    assert code == 1


def test_modular_check_family(capsys):
    code, out, _ = run(capsys, "modular-check", "--family", "EC-X0(4)", "--truncation", "20")
    names = [c["name"] for c in json.loads(out)["checks"]]
    assert code == 0 and names == ["hauptmodul", "period", "yukawa"]


def test_twist_command(capsys):
    code, out, _ = run(capsys, "twist", "--family", "K3-N6-twisted", "--truncation", "30")
    doc = json.loads(out)
    assert code == 0 and doc["annihilated_by"]["ok"]
    assert doc["annihilator"]["operator"] == doc["annihilated_by"]["operator"]
    code, out, _ = run(capsys, "twist", "--family", "EC-X0(3)", "--ij", "1,1", "--truncation", "4")
    assert list(json.loads(out)["series"]["coefficients"].values())[:3] == ["1", "12", "540"]


def test_bad_rational_flag(capsys):
    code, _, err = run(capsys, "dual-instantons", "--family", "K3-N2", "--beta", "x")
    assert code == 2 and "--beta" in err


def test_determinism(capsys):
    outs = {run(capsys, "dual-instantons", "--family", "EC-X0(3)", "--truncation", "15")[1] for _ in range(2)}
    assert len(outs) == 1


def test_module_entry_point():
    r = subprocess.run(
        [sys.executable, "-m", "mumops", "catalog"], capture_output=True, text=True, check=True
    )
    assert "K3-BeukersPeters" in json.loads(r.stdout)["families"]


@pytest.mark.parametrize("jobs", ["1", "2"])
def test_verify_all(capsys, jobs):
    code, out, _ = run(capsys, "verify-all", "--format", "plain", "--jobs", jobs)
    lines = out.splitlines()
    assert len(lines) == 12 and code == 0
    assert all(line.startswith("[PASS]") for line in lines)

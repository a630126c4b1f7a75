from __future__ import annotations

import json
from pathlib import Path

import pytest

from iiaffine import cli, forms

FIXTURES = Path(__file__).parent / "fixtures"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_validate_examples(capsys):
    assert run(capsys, "validate", "--builtin", "klein")[0] == 0
    code, out, _ = run(capsys, "validate", "--input", str(FIXTURES / "half_shift.json"))
    assert code == 1
    assert "tier: IntegralAffine, expected IntegralIntegralAffine" in out
    code, _, err = run(capsys, "validate", "--input", str(FIXTURES / "malformed.json"))
    assert code == 2 and "malformed" in err


def test_validate_broken_tiling(capsys):
    code, out, _ = run(capsys, "validate", "--input", str(FIXTURES / "broken.json"), "--format", "json")
    assert code == 1
    doc = json.loads(out)
    assert not doc["valid"] and doc["tiling_failures"] > 0


def test_verify_examples(capsys):
    code, out, _ = run(capsys, "verify", "--builtin", "torus-2", "--scale", "3", "--format", "json",
                       "--mc-samples", "100000")
    doc = json.loads(out)
    assert code == 0 and doc["all_passed"]
    assert doc["vol_B"] == doc["rr"] == "9" and doc["count_BZ"] == doc["count_BS"] == 9
    code, out, _ = run(capsys, "verify", "--builtin", "kodaira-thurston", "--mc-samples", "100000")
    assert code == 0 and "vol(B)              = 1" in out
    code, _, err = run(capsys, "verify", "--input", str(FIXTURES / "broken.json"), "--mc-samples", "1000")
    assert code == 1 and "warning" in err


def test_holonomy_examples(capsys):
    code, out, _ = run(capsys, "holonomy", "--x", "1/2", "--m", "1")
    assert code == 0 and out.strip() == "exp(2πi·1/2) = -1"
    code, out, _ = run(capsys, "holonomy", "--x", "3/7,2", "--m", "0,0")
    assert code == 0 and out.strip().endswith("= 1")
    code, out, _ = run(capsys, "holonomy", "--x", "1/3,1/4", "--m", "1,2", "--numeric", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["phase"] == "5/6" and doc["numeric"]["error"] < 1e-8


def test_holonomy_usage_errors(capsys):
    assert run(capsys, "holonomy", "--x", "1/2,1", "--m", "1")[0] == 2
    assert run(capsys, "holonomy", "--x", "1/2", "--m", "1/2")[0] == 2
    assert run(capsys, "holonomy", "--x", "half", "--m", "1")[0] == 2


def test_forms_selftest_examples(capsys):
    code, out, _ = run(capsys, "forms-selftest", "--quick")
    assert code == 0 and out.count("PASS") == 6


def test_forms_selftest_catches_sign_bug(capsys, monkeypatch):
    monkeypatch.setattr(forms, "merge_legs", _unsigned(forms.merge_legs))
    code, out, _ = run(capsys, "forms-selftest", "--quick")
    assert code == 1
    assert "counterexample:" in out


def _unsigned(merge):
    def merge_without_sign(a, b):
        sign, legs = merge(a, b)
        return abs(sign), legs
    return merge_without_sign


def test_volume_lattice_bs_intersect(capsys):
    code, out, _ = run(capsys, "volume", "--builtin", "klein", "--scale", "3", "--mc-samples", "10000", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["volume"] == "3" and doc["monte_carlo"]["contains_exact"]
    code, out, _ = run(capsys, "lattice", "--builtin", "torus-2", "--scale", "2", "--format", "json")
    assert json.loads(out)["points"] == [["0", "0"], ["0", "1"], ["1", "0"], ["1", "1"]]
    code, out, _ = run(capsys, "bs", "--builtin", "torus-1", "--scale", "5")
    assert code == 0 and out.startswith("|BS| = 5")
    code, out, _ = run(capsys, "intersect", "--builtin", "torus-1", "--scale", "5", "--format", "json")
    assert json.loads(out)["signed"] == -5
    code, out, _ = run(capsys, "intersect", "--builtin", "klein", "--format", "json")
    assert code == 0 and json.loads(out)["signed"] is None
    assert run(capsys, "intersect", "--builtin", "torus-1", "--sections", "Zero,Zero")[0] == 1
    assert run(capsys, "intersect", "--builtin", "torus-1", "--sections", "Zero,Nope")[0] == 2


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["verify"],
    ["verify", "--builtin", "klein", "--input", "x.json"],
    ["verify", "--builtin", "sphere"],
    ["lattice", "--input", "/nonexistent/presentation.json"],
    ["verify", "--builtin", "klein", "--format", "xml"],
])
def test_usage_errors_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_json_output_round_trips(capsys):
    from iiaffine.riemann_roch import VerificationReport
    _, out, _ = run(capsys, "verify", "--builtin", "klein", "--scale", "2", "--format", "json", "--mc-samples", "1000")
    report = VerificationReport.from_dict(json.loads(out))
    assert json.loads(report.to_json()) == json.loads(out)
    assert report.to_json() == json.dumps(json.loads(out), indent=2)

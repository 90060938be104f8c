"""
End-to-end tests of the command-line interface: exit codes, report shapes
and determinism.
"""

import json

import pytest

from engine.metrics import omega_from_metric
from engine.obstruction import corollary_conditions
from engine.scalars import GaussRat
from interfaces.cli import VERSION, main, parse_assignments, parse_value
from utils.errors import AssignmentError

from conftest import NON_BALANCED

IWASAWA_FD = "a11=0,a12=0.4,a21=-0.2,a22=0,a31=0,a32=0"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    return code, json.loads(out)


@pytest.mark.parametrize("text, expected", [
    ("2", 2),
    ("-0.5", -0.5),
    ("1+2i", 1 + 2j),
    ("3j", 3j),
    ("-i", -1j),
    ("i", 1j),
])
def test_parse_value(text, expected):
    assert parse_value(text) == expected


def test_parse_assignments():
    assert parse_assignments("a1=0, a2=1,alpha12=1+2i") == {"a1": 0, "a2": 1, "alpha12": 1 + 2j}
    assert parse_assignments(None) == {}
    with pytest.raises(AssignmentError):
        parse_assignments("a1")
    with pytest.raises(AssignmentError):
        parse_assignments("a1=x")


def test_version(capsys):
    code, out, _ = run(capsys, "--version")
    assert code == 0
    assert VERSION in out


@pytest.mark.parametrize("name", ["iwasawa", "nakamura-i", "nakamura-ii"])
def test_check_algebra_holds(capsys, name):
    code, doc = run_json(capsys, "check-algebra", "--registry", name)
    assert code == 0
    assert doc["passed"] is True
    assert doc["status"] == "holds"


def test_check_balanced_on_registry_and_file(capsys, tmp_path):
    code, doc = run_json(capsys, "check-balanced", "--registry", "iwasawa")
    assert code == 0
    assert doc["balanced"] is True
    path = tmp_path / "non-balanced.balg"
    path.write_text(NON_BALANCED, encoding="utf-8")
    code, doc = run_json(capsys, "check-balanced", "--model", str(path))
    assert code == 2
    assert doc["balanced"] is False
    assert doc["model"] == "non-balanced"


def test_mc_residual(capsys):
    code, out, _ = run(capsys, "mc-residual", "--registry", "iwasawa")
    assert code == 0
    assert "residual 0" in out


def test_conditions_json_shape(capsys):
    code, doc = run_json(capsys, "conditions", "--registry", "nakamura-i", "--curve", "class3")
    assert code == 0
    assert doc == {"conditions": [], "verdict": "no-first-order-obstruction"}


def test_conditions_on_nakamura_ii(capsys):
    code, doc = run_json(capsys, "conditions", "--registry", "nakamura-ii")
    assert code == 0
    assert set(doc) == {"conditions", "verdict"}
    assert len(doc["conditions"]) == 2
    assert doc["verdict"] == "conditional"


def test_conditions_are_printed_normalized(capsys, nakamura_ii):
    alg = nakamura_ii.algebra
    omega = omega_from_metric(alg, nakamura_ii.metric())
    residual = corollary_conditions(alg, omega, nakamura_ii.curve().derivative)
    _, doc = run_json(capsys, "conditions", "--registry", "nakamura-ii")
    assert doc["conditions"] == [str(c.normalized()) for c in residual.conditions]
    assert doc["conditions"] != [str(c) for c in residual.conditions]
    assert all(c.normalized().leading_coefficient() == GaussRat(1, 0) for c in residual.conditions)


@pytest.mark.parametrize("assign, expected_code, expected", [
    ("a1=0,a2=1,a3=0", 2, "obstructed"),
    ("a1=1,a2=0,a3=0", 0, "no-first-order-obstruction"),
])
def test_verdict_at_the_identity(capsys, assign, expected_code, expected):
    code, doc = run_json(
        capsys, "verdict", "--registry", "nakamura-ii", "--assign", assign, "--metric-sample", "identity"
    )
    assert code == expected_code
    assert doc["verdict"] == expected
    assert len(doc["samples"]) == 1


def test_verdict_with_yaml_samples(capsys, tmp_path):
    path = tmp_path / "samples.yaml"
    path.write_text(
        "samples:\n"
        "  - {alpha11: 1, alpha22: 1, alpha33: 1, alpha12: 0, alpha13: 0, alpha23: 0}\n"
        "  - {alpha11: 1, alpha22: 1, alpha33: 1, alpha12: 0, alpha13: 0.5, alpha23: 0}\n",
        encoding="utf-8",
    )
    code, doc = run_json(
        capsys, "verdict", "--registry", "nakamura-ii", "--assign", "a1=1,a2=0,a3=0", "--metric-sample", str(path)
    )
    assert code == 2
    assert [s["verdict"] for s in doc["samples"]] == ["no-first-order-obstruction", "obstructed"]
    assert doc["samples"][1]["fired"] == [0]
    assert doc["samples"][1]["values"][0] == {"re": "0", "im": "0.25"}


def test_verdict_rejects_indefinite_samples(capsys, tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("{alpha11: -1, alpha22: 1, alpha33: 1, alpha12: 0, alpha13: 0, alpha23: 0}\n", encoding="utf-8")
    code, _, err = run(
        capsys, "verdict", "--registry", "nakamura-ii", "--assign", "a1=1,a2=0,a3=0", "--metric-sample", str(path)
    )
    assert code == 1
    assert "positive definite" in err


def test_obstruction_report(capsys):
    code, doc = run_json(capsys, "obstruction", "--registry", "nakamura-ii", "--metric-sample", "identity")
    assert code == 0
    assert doc["verdict"] == "conditional"
    assert doc["labels"] == ["e1^e2^~e1^~e2^~e3", "e1^e3^~e1^~e2^~e3"]
    # every invariant top-degree monomial survives and is harmonic
    assert len(doc["representatives"]) == 3
    assert all(r["harmonic"] for r in doc["representatives"])
    assert doc["mc_ok"] is True
    assert doc["caveats"]


def test_obstruction_certificates_on_weighted_class(capsys):
    code, doc = run_json(capsys, "obstruction", "--registry", "nakamura-i", "--curve", "class4")
    assert code == 0
    assert doc["conditions"] == []
    assert doc["certificates"]
    assert all(c["verified"] for c in doc["certificates"])


def test_paper_literal_convention_lists_the_difference(capsys):
    code, doc = run_json(capsys, "obstruction", "--registry", "iwasawa", "--convention", "paper-literal")
    assert code == 0
    assert doc["convention"] == "paper-literal"
    assert doc["convention_difference"] != "0"


def test_verify_theorem(capsys):
    code, doc = run_json(
        capsys, "verify-theorem", "--registry", "iwasawa", "--assign", IWASAWA_FD, "--metric-sample", "identity"
    )
    assert code == 0
    assert doc["passed"] is True
    assert doc["status"] == "holds"
    assert len(doc["errors"]) == 3


def test_cohomology_total(capsys):
    code, doc = run_json(capsys, "cohomology", "--registry", "nakamura-i")
    assert code == 0
    assert doc["total"] == 3
    assert [s["cohomology"] for s in doc["sectors"]] == [1, 1, 1]
    code, out, _ = run(capsys, "cohomology", "--registry", "iwasawa")
    assert "dim H^(0,1) = 2" in out


def test_text_report_is_deterministic(capsys):
    first = run(capsys, "obstruction", "--registry", "iwasawa")
    second = run(capsys, "obstruction", "--registry", "iwasawa")
    assert first[0] == 0
    assert first[1] == second[1]
    assert first[1].startswith("=" * 60)


@pytest.mark.parametrize("argv, message", [
    (["conditions", "--registry", "no-such-model"], "unknown model"),
    (["conditions"], "exactly one of --registry and --model"),
    (["verdict", "--registry", "nakamura-ii", "--assign", "zz=1"], "unknown variable"),
    (["verdict", "--registry", "nakamura-ii", "--assign", "alpha11=1+i"], "real variable"),
    (["cohomology", "--registry", "iwasawa", "--bidegree", "5,0"], "out of range"),
    (["verify-theorem", "--registry", "iwasawa", "--fd-steps", "0.01,-0.1"], "positive"),
])
def test_errors_exit_with_one(capsys, argv, message):
    code, _, err = run(capsys, *argv)
    assert code == 1
    assert message in err


def test_usage_errors_exit_with_one(capsys):
    code, _, _ = run(capsys, "no-such-command")
    assert code == 1

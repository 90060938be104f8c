"""
Tests for the model file parser, its diagnostics and the canonical printer.
"""

import numpy as np
import pytest

from models.dsl import parse, parse_file, print_model, tokenize
from models.registry import REGISTRY_NAMES, available, registry
from utils.errors import (
    AlgebraCheckError,
    BalobsError,
    BidegreeError,
    ModelSyntaxError,
    NonHermitianError,
    StructuralError,
    UndeclaredIdentifierError,
    UnknownModelError,
)


def test_token_columns():
    tokens = tokenize("d e3 = - e1 ^ e2")
    assert [(t.text, t.col) for t in tokens[:-1]] == [
        ("d", 1), ("e3", 3), ("=", 6), ("-", 8), ("e1", 10), ("^", 13), ("e2", 15),
    ]
    assert tokens[-1].kind == "EOF"


def test_newlines_inside_brackets_are_dropped():
    tokens = tokenize("(a\n+ b)\nc")
    assert [t.kind for t in tokens] == ["OP", "IDENT", "OP", "IDENT", "OP", "NEWLINE", "IDENT", "EOF"]
    plus = tokens[2]
    assert (plus.line, plus.col) == (2, 1)


def test_unexpected_character():
    with pytest.raises(ModelSyntaxError) as err:
        tokenize("dim 3 $", source="x.balg")
    assert (err.value.line, err.value.column) == (1, 7)
    assert str(err.value) == "x.balg:1:7: unexpected character '$'"


def test_undeclared_identifier_has_a_position():
    text = "dim 3\nvar a complex\ncurve c { t*b * ~e1 @ Z1 }\n"
    with pytest.raises(UndeclaredIdentifierError) as err:
        parse(text, source="bad.balg")
    assert (err.value.line, err.value.column) == (3, 13)
    assert "'b'" in str(err.value)
    assert str(err.value).startswith("bad.balg:3:13:")


def test_dangling_operator():
    with pytest.raises(ModelSyntaxError, match="dangling operator '\\^'") as err:
        parse("dim 3\nd e3 = e1 ^\n")
    assert (err.value.line, err.value.column) == (2, 11)


def test_missing_dimension():
    with pytest.raises(ModelSyntaxError, match="missing 'dim'"):
        parse("model empty\n")


def test_non_integrable_structure():
    with pytest.raises(AlgebraCheckError, match=r"\(0,2\)"):
        parse("dim 3\nd e3 = ~e1 ^ ~e2\n", source="j.balg")


def test_structure_needs_constant_coefficients():
    with pytest.raises(ModelSyntaxError, match="Gaussian-rational"):
        parse("dim 2\nvar x real\nd e2 = x * e1 ^ ~e1\n")


def test_non_hermitian_metric():
    with pytest.raises(NonHermitianError):
        parse("dim 2\nmetric g { row 1, i; row i, 1 }\n")


def test_metric_may_not_depend_on_t():
    with pytest.raises(ModelSyntaxError, match="metric_curve"):
        parse("dim 1\nmetric g { row 1 + t }\n")


def test_curve_must_be_a_01_vector_form():
    with pytest.raises(BidegreeError):
        parse("dim 2\ncurve c { t * e1 @ Z1 }\n")


def test_curve_must_vanish_at_zero():
    with pytest.raises(StructuralError, match="t = 0"):
        parse("dim 2\ncurve c { ~e1 @ Z1 }\n")


def test_character_only_inside_weights():
    text = "dim 1\nchar w { dlog10 = - e1; dlog01 = ~e1 }\ncurve c { t * w * ~e1 @ Z1 }\n"
    with pytest.raises(ModelSyntaxError, match="inside a weight"):
        parse(text)


def test_undeclared_character_in_weight():
    text = "dim 1\nchar w { dlog10 = - e1; dlog01 = ~e1 }\ncurve c { t * [v] * ~e1 @ Z1 }\n"
    with pytest.raises(UndeclaredIdentifierError):
        parse(text)


def test_default_sectors_come_from_characters():
    model = parse("dim 1\nchar w { dlog10 = - e1; dlog01 = ~e1 }\n")
    assert model.sectors == [(0,), (1,), (-1,)]
    assert model.name == "model"


def test_t_is_declared_implicitly():
    model = parse("dim 1\nvar x complex\n", source="models/line.balg")
    assert model.name == "line"
    assert model.var_table.names == ("x", "~x", "t")
    assert model.var_table.is_real("t")


def test_lookup_of_unknown_names(iwasawa):
    with pytest.raises(UndeclaredIdentifierError, match="declared: family"):
        iwasawa.curve("nope")
    assert iwasawa.metric_curve().name == "g(const)"


def test_registry_models(any_model):
    assert any_model.source.endswith(".balg")
    assert any_model.metric().n == 3
    assert any_model.curve() is next(iter(any_model.curves.values()))
    assert any_model.assumptions and any_model.assumptions[0].kind == "lattice"


def test_nakamura_i_curves_and_sectors(nakamura_i):
    assert list(nakamura_i.curves) == ["class1", "class2", "class3", "class4"]
    assert nakamura_i.sectors == [(0,), (1,), (-1,)]
    w = nakamura_i.algebra.unit_weight("w")
    comp = nakamura_i.curve("class3").derivative.component(1)
    assert comp.weights() == [w]


def test_registry_lookup():
    assert available()[:3] == list(REGISTRY_NAMES)
    assert registry("iwasawa") is registry("iwasawa")
    with pytest.raises(UnknownModelError, match="available: iwasawa"):
        registry("no-such-model")


@pytest.mark.parametrize("name", REGISTRY_NAMES)
def test_printed_model_reparses_identically(name):
    text = print_model(registry(name))
    again = parse(text, source=f"{name}.balg")
    assert print_model(again) == text
    assert list(again.curves) == list(registry(name).curves)
    assert again.sectors == registry(name).sectors


def test_parse_file_reports_missing_files(tmp_path):
    with pytest.raises(BalobsError, match="cannot read"):
        parse_file(tmp_path / "absent.balg")


def test_parse_file_reads_text(tmp_path):
    path = tmp_path / "flat.balg"
    path.write_text("model flat\ndim 2\nmetric g { row 1, 0; row 0, 1 }\n", encoding="utf-8")
    model = parse_file(path)
    assert model.name == "flat"
    assert model.algebra.is_abelian()
    assert model.source == str(path)


def test_weighted_curves_print_in_model_syntax(nakamura_i):
    phi = nakamura_i.curve("class3").phi
    assert "[w] ~e2" in str(phi)
    assert "[w] * ~e2" in phi.text(dsl=True)
    text = print_model(nakamura_i)
    assert "[w] * ~e2 @ Z2" in text
    again = parse(text, source="nakamura-i.balg")
    assert again.curve("class3").phi.text() == phi.text()


STRUCTURES = [
    ("", [0]),
    ("d e3 = - e1 ^ e2", [0]),
    ("char w { dlog10 = - e1; dlog01 = ~e1 }\nd e2 = - e1 ^ e2\nd e3 = e1 ^ e3\nsectors 0, w, -w", [0, 1, -1]),
]


def _gauss_text(rng) -> str:
    re, im = int(rng.integers(-3, 4)), int(rng.integers(-3, 4))
    if re == 0 and im == 0:
        re = 1
    sign = "-" if im < 0 else "+"
    return f"({re} {sign} {abs(im)}*i)"


def _random_model_text(rng, index: int) -> str:
    structure, weights = STRUCTURES[index % len(STRUCTURES)]
    rows = [["0"] * 3 for _ in range(3)]
    for j in range(3):
        rows[j][j] = str(int(rng.integers(2, 6)))
        for k in range(j + 1, 3):
            re, im = int(rng.integers(-1, 2)), int(rng.integers(-1, 2))
            rows[j][k] = f"({re} + {im}*i)"
            rows[k][j] = f"({re} - {im}*i)"
    terms = []
    for _ in range(int(rng.integers(1, 5))):
        weight = weights[int(rng.integers(len(weights)))]
        prefix = {0: "", 1: "[w] * ", -1: "[-w] * "}[weight]
        var = f"a{int(rng.integers(1, 4))}"
        bar = int(rng.integers(1, 4))
        target = int(rng.integers(1, 4))
        terms.append(f"t*{var}*{_gauss_text(rng)} * {prefix}~e{bar} @ Z{target}")
    lines = [
        f"model random-{index}",
        "dim 3",
        "var a1, a2, a3 complex",
        structure,
        "metric g {",
        *("  row " + ", ".join(row) for row in rows),
        "}",
        "curve c { " + " + ".join(terms) + " }",
    ]
    return "\n".join(lines) + "\n"


@pytest.mark.parametrize("index", range(9))
def test_random_models_print_and_reparse(index):
    rng = np.random.default_rng(1000 + index)
    model = parse(_random_model_text(rng, index), source=f"random-{index}.balg")
    text = print_model(model)
    again = parse(text, source=f"random-{index}.balg")
    assert print_model(again) == text
    assert again.curve("c").phi.text() == model.curve("c").phi.text()
    assert [[str(e) for e in row] for row in again.metric().matrix] == [[str(e) for e in row] for row in model.metric().matrix]
    assert again.sectors == model.sectors

"""
Tests for the obstruction form, the theorem residual and verdicts.
"""

import numpy as np
import pytest

from engine.calculus import VForm, contract_conj, delbar
from engine.cohomology import ClassResidual, reduce_class
from engine.forms import form_conj
from engine.metrics import omega_from_metric, wedge_power
from engine.obstruction import (
    CONDITIONAL,
    NOT_OBSTRUCTED,
    OBSTRUCTED,
    SCOPE_CAVEAT,
    DeformationCurve,
    MetricCurve,
    convention_difference,
    corollary_conditions,
    first_order_obstruction,
    obstruction_report,
    symbolic_verdict,
    theorem_residual,
    verdict,
    verdict_sweep,
)
from engine.scalars import GaussPoly
from models.dsl import parse
from utils.errors import AssignmentError, NotPositiveDefiniteError, StructuralError

from conftest import random_form

IDENTITY = {"alpha11": 1, "alpha22": 1, "alpha33": 1, "alpha12": 0, "alpha13": 0, "alpha23": 0}

METRIC_CURVE_MODEL = """
model heisenberg-stretch
dim 3
var s real
d e3 = - e1 ^ e2
metric g { row 1, 0, 0; row 0, 1, 0; row 0, 0, 1 }
metric_curve stretch { row 1, 0, 0; row 0, 1, 0; row 0, 0, 1 + s*t }
curve line { t * ~e1 @ Z2 }
"""


def _conditions(model, curve="family"):
    alg = model.algebra
    omega = omega_from_metric(alg, model.metric())
    return corollary_conditions(alg, omega, model.curve(curve).derivative)


def test_derivative_is_the_linear_part(iwasawa):
    curve = iwasawa.curve("family")
    alg = iwasawa.algebra
    d1 = curve.derivative
    assert d1.q == 1
    assert d1.component(3) == alg.mono((), (1,), coeff=alg.var("a31")) + alg.mono((), (2,), coeff=alg.var("a32"))


def test_curve_must_vanish_at_zero(iwasawa):
    alg = iwasawa.algebra
    phi = VForm.from_terms(alg, [(1, alg.mono((), (1,), coeff=alg.var("a11")))])
    with pytest.raises(StructuralError):
        DeformationCurve("offset", phi)


def test_curve_evaluation(nakamura_ii):
    curve = nakamura_ii.curve()
    phi = curve.at(0.5, {"a1": 2, "a2": 0, "a3": 1j})
    assert abs(phi.component(1).coefficient((), (1,)) - 1.0) < 1e-12
    assert abs(phi.component(3).coefficient((), (1,)) - 0.5j) < 1e-12


def test_iwasawa_obstruction_has_a_single_term(iwasawa):
    alg = iwasawa.algebra
    omega = omega_from_metric(alg, iwasawa.metric())
    theta = first_order_obstruction(alg, omega, iwasawa.curve().derivative)
    assert list(theta.terms) == [(alg.zero_weight, (1, 2), (1, 2, 3))]


def test_constant_metric_curve_residual_is_theta(nakamura_ii):
    alg = nakamura_ii.algebra
    mcurve = nakamura_ii.metric_curve()
    assert mcurve.is_constant()
    assert mcurve.power_derivative(alg).is_zero()
    omega = omega_from_metric(alg, nakamura_ii.metric())
    theta = first_order_obstruction(alg, omega, nakamura_ii.curve().derivative)
    assert theorem_residual(alg, mcurve, nakamura_ii.curve()) == theta


def test_varying_metric_curve_adds_its_delbar_term():
    model = parse(METRIC_CURVE_MODEL, source="stretch.balg")
    alg = model.algebra
    mcurve = model.metric_curve("stretch")
    assert not mcurve.is_constant()
    assert mcurve.at_zero().entry(3, 3) == alg.poly(1)
    derivative = mcurve.power_derivative(alg)
    assert not derivative.is_zero()
    curve = model.curve("line")
    omega = omega_from_metric(alg, mcurve.at_zero())
    theta = first_order_obstruction(alg, omega, curve.derivative)
    assert theorem_residual(alg, mcurve, curve) == theta + delbar(derivative)


def test_symbolic_verdicts(nakamura_i, nakamura_ii):
    assert symbolic_verdict(_conditions(nakamura_ii)) == CONDITIONAL
    assert symbolic_verdict(_conditions(nakamura_i, "class3")) == NOT_OBSTRUCTED
    alg = nakamura_ii.algebra
    forced = ClassResidual(
        form=alg.zero(),
        exact_part=alg.zero(),
        potential=alg.zero(),
        residual=alg.zero(),
        conditions=[GaussPoly.const(alg.var_table, 1)],
    )
    assert symbolic_verdict(forced) == OBSTRUCTED


@pytest.mark.parametrize("direction, expected", [
    ({"a1": 0, "a2": 1, "a3": 0}, OBSTRUCTED),
    ({"a1": 1, "a2": 0, "a3": 0}, NOT_OBSTRUCTED),
    ({"a1": 0, "a2": 0, "a3": 1}, OBSTRUCTED),
    ({"a1": 0, "a2": 0, "a3": 0}, NOT_OBSTRUCTED),
])
def test_nakamura_ii_verdicts_at_the_identity(nakamura_ii, direction, expected):
    result = verdict(_conditions(nakamura_ii), {**IDENTITY, **direction}, nakamura_ii.metric())
    assert result.verdict == expected
    assert result.obstructed == (expected == OBSTRUCTED)


def test_off_diagonal_metric_obstructs_a1(nakamura_ii):
    sample = {**IDENTITY, "alpha13": 0.5, "a1": 1, "a2": 0, "a3": 0}
    result = verdict(_conditions(nakamura_ii), sample, nakamura_ii.metric())
    assert result.verdict == OBSTRUCTED
    assert result.fired == [0]
    assert abs(result.values[0] - 0.25j) < 1e-12
    assert abs(result.values[1]) < 1e-12


def test_verdict_rejects_indefinite_metric(nakamura_ii):
    sample = {**IDENTITY, "alpha11": -1, "a1": 1, "a2": 0, "a3": 0}
    with pytest.raises(NotPositiveDefiniteError):
        verdict(_conditions(nakamura_ii), sample, nakamura_ii.metric())


def test_verdict_needs_every_condition_variable(nakamura_ii):
    with pytest.raises(AssignmentError):
        verdict(_conditions(nakamura_ii), {"a1": 1})


def test_verdict_sweep_orders_directions_outermost(nakamura_ii):
    directions = [{"a1": 0, "a2": 1, "a3": 0}, {"a1": 1, "a2": 0, "a3": 0}]
    samples = [IDENTITY, {**IDENTITY, "alpha13": 0.5}]
    results = verdict_sweep(_conditions(nakamura_ii), directions, samples, nakamura_ii.metric())
    assert [r.verdict for r in results] == [OBSTRUCTED, OBSTRUCTED, NOT_OBSTRUCTED, OBSTRUCTED]
    assert results[2].assignment["a1"] == 1


def test_obstruction_report_fields(iwasawa):
    report = obstruction_report(iwasawa.algebra, iwasawa.metric_curve(), iwasawa.curve())
    assert report.curve == "family"
    assert report.convention == "hermitian-standard"
    assert report.mc_ok is True
    assert report.theta == report.theorem_residual
    assert report.caveats == [SCOPE_CAVEAT]
    assert report.class_residual.labels == ["e1^e2^~e1^~e2^~e3"]


def test_convention_difference(iwasawa):
    alg = iwasawa.algebra
    diff = convention_difference(alg, iwasawa.metric(), iwasawa.curve().derivative)
    assert not diff.is_zero()
    assert diff.bidegrees() == [(2, 3)]
    # on the diagonal both conventions give the same form
    coeff = diff.coefficient((1, 2), (1, 2, 3))
    for name in ("alpha12", "~alpha12", "alpha13", "~alpha13", "alpha23", "~alpha23"):
        coeff = coeff.subs(name, 0)
    assert coeff.is_zero()


def test_metric_curve_constant_name(nakamura_ii):
    mcurve = MetricCurve.constant(nakamura_ii.metric())
    assert mcurve.name == "g(const)"
    assert mcurve.is_constant()
    assert mcurve.at_zero().matrix == nakamura_ii.metric().matrix


def _random_direction(model, rng):
    alg = model.algebra
    comps = [random_form(alg, rng, 0, 1, weights=model.sectors, terms=2) for _ in range(alg.n)]
    return VForm(alg, comps)


def test_obstruction_is_additive_in_the_direction(any_model, rng):
    alg = any_model.algebra
    omega = omega_from_metric(alg, any_model.metric())
    first, second = _random_direction(any_model, rng), _random_direction(any_model, rng)
    total = first_order_obstruction(alg, omega, first + second)
    assert total == first_order_obstruction(alg, omega, first) + first_order_obstruction(alg, omega, second)
    assert first_order_obstruction(alg, omega, first - first).is_zero()


def test_conjugate_obstruction_is_the_delbar_of_the_conjugate_contraction(any_model, rng):
    alg = any_model.algebra
    omega = omega_from_metric(alg, any_model.metric())
    power = wedge_power(omega, alg.n - 1)
    for _ in range(3):
        direction = _random_direction(any_model, rng)
        theta = first_order_obstruction(alg, omega, direction)
        assert form_conj(theta) == delbar(contract_conj(direction, power))


SWAPPED_NAKAMURA_II = """
model nakamura-ii-swapped
dim 3
var alpha11, alpha22, alpha33 real
var alpha12, alpha13, alpha23 complex
var a1, a2, a3 complex
d e3 = - e1 ^ e3
d e2 = e1 ^ e2
metric g {
  row alpha11, -i*alpha13, -i*alpha12
  row i*~alpha13, alpha33, i*~alpha23
  row i*~alpha12, -i*alpha23, alpha22
}
curve family { t*a1 * ~e1 @ Z1 + t*a3 * ~e1 @ Z2 + t*a2 * ~e1 @ Z3 }
"""


def _condition_matrix(conditions, metric_values):
    rows = []
    for c in conditions:
        row = []
        for k in (1, 2, 3):
            direction = {f"a{j}": float(j == k) for j in (1, 2, 3)}
            row.append(c.evaluate({**metric_values, **direction}))
        rows.append(row)
    return np.array(rows, dtype=complex).reshape(len(conditions), 3)


def test_conditions_do_not_depend_on_the_basis_order(nakamura_ii, rng):
    swapped = parse(SWAPPED_NAKAMURA_II, source="nakamura-ii-swapped.balg")
    for _ in range(3):
        values = {
            "alpha11": 2.0 + rng.random(),
            "alpha22": 2.0 + rng.random(),
            "alpha33": 2.0 + rng.random(),
            "alpha12": complex(*rng.normal(size=2)) / 2,
            "alpha13": complex(*rng.normal(size=2)) / 2,
            "alpha23": complex(*rng.normal(size=2)) / 2,
        }
        m = _condition_matrix(_conditions(nakamura_ii).conditions, values)
        m_swapped = _condition_matrix(_conditions(swapped).conditions, values)
        rank = np.linalg.matrix_rank(m)
        assert rank == 2
        assert np.linalg.matrix_rank(m_swapped) == rank
        assert np.linalg.matrix_rank(np.vstack([m, m_swapped])) == rank


@pytest.mark.parametrize("model_name, curve", [
    ("iwasawa", "family"),
    ("nakamura-ii", "family"),
    ("nakamura-i", "class1"),
    ("nakamura-i", "class2"),
])
def test_reducing_the_residual_again_changes_nothing(model_name, curve, request):
    model = request.getfixturevalue(model_name.replace("-", "_"))
    first = _conditions(model, curve)
    if first.residual.is_zero():
        return
    again = reduce_class(first.residual)
    assert again.residual == first.residual
    assert again.exact_part.is_zero()
    assert [str(c) for c in again.normalized] == [str(c) for c in first.normalized]

"""
Tests for Hermitian metrics, the balanced test and the numeric Hodge theory.
"""

import numpy as np
import pytest

from engine.calculus import delbar
from engine.forms import NumWForm, as_numeric, form_conj
from engine.metrics import (
    HERMITIAN_STANDARD,
    PAPER_LITERAL,
    HermMetric,
    HodgeStar,
    balanced_check,
    delbar_adjoint,
    dolbeault_laplacian,
    harmonic_check,
    hodge_star,
    identity_assignment,
    omega_from_metric,
    posdef_check,
    realness_defect,
    wedge_power,
)
from engine.scalars import GaussRat
from utils.errors import AssignmentError, NonHermitianError, NotPositiveDefiniteError, StructuralError

from conftest import random_form


def test_generic_metric_is_hermitian_standard(iwasawa):
    g = iwasawa.metric("g")
    assert g.convention == HERMITIAN_STANDARD
    assert g.entry(1, 2) == g.entry(2, 1).conjugate()
    assert g.alpha(1, 2) == iwasawa.algebra.var("alpha12")
    assert g.with_convention(PAPER_LITERAL).convention == PAPER_LITERAL


def test_non_hermitian_matrix_is_rejected(iwasawa):
    alg = iwasawa.algebra
    one = alg.poly(1)
    zero = alg.poly(0)
    with pytest.raises(NonHermitianError):
        HermMetric([[one, alg.poly(GaussRat(0, 1))], [alg.poly(GaussRat(0, 1)), one]])
    with pytest.raises(StructuralError):
        HermMetric([[one, zero]])


def test_fundamental_form_of_the_identity(iwasawa):
    alg = iwasawa.algebra
    g = iwasawa.metric()
    omega = omega_from_metric(alg, g)
    half_i = GaussRat(0, 1) / 2
    assert omega.coefficient((1,), (1,)) == alg.var("alpha11") * half_i
    assert omega.coefficient((1,), (2,)) == alg.var("alpha12") / 2
    assert realness_defect(omega).is_zero()


def test_paper_literal_form_is_not_real_off_the_diagonal(iwasawa):
    alg = iwasawa.algebra
    literal = omega_from_metric(alg, iwasawa.metric().with_convention(PAPER_LITERAL))
    defect = realness_defect(literal)
    assert not defect.is_zero()
    assert defect == form_conj(literal) - literal
    # the diagonal terms agree in both conventions
    standard = omega_from_metric(alg, iwasawa.metric())
    assert literal.coefficient((2,), (2,)) == standard.coefficient((2,), (2,))


def test_wedge_power_range(iwasawa):
    omega = omega_from_metric(iwasawa.algebra, iwasawa.metric())
    with pytest.raises(StructuralError):
        wedge_power(omega, 0)
    with pytest.raises(StructuralError):
        wedge_power(omega, 4)
    assert wedge_power(omega, 3).bidegrees() == [(3, 3)]


def test_registry_metrics_are_balanced(any_model):
    alg = any_model.algebra
    report = balanced_check(alg, omega_from_metric(alg, any_model.metric()))
    assert report.balanced
    assert report.del_residual.is_zero()
    assert report.equivalent
    assert report.realness_defect.is_zero()


def test_non_balanced_structure(non_balanced):
    alg = non_balanced.algebra
    report = balanced_check(alg, omega_from_metric(alg, non_balanced.metric()))
    assert not report.balanced
    assert report.residual.bidegrees() == [(2, 3)]
    assert not report.del_residual.is_zero()
    assert report.equivalent


def test_posdef_check():
    assert posdef_check(np.eye(3))
    assert not posdef_check(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert posdef_check(np.array([[1.0, -0.5j], [0.5j, 1.0]]))
    with pytest.raises(NonHermitianError):
        posdef_check(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_identity_assignment(iwasawa):
    g = iwasawa.metric()
    values = identity_assignment(g)
    assert values == {
        "alpha11": 1, "alpha22": 1, "alpha33": 1,
        "alpha12": 0, "alpha13": 0, "alpha23": 0,
    }
    assert np.allclose(g.numeric(values), np.eye(3))
    assert identity_assignment(g, {"t": 0.0}) == values


def test_identity_assignment_respects_fixed_values(iwasawa):
    with pytest.raises(AssignmentError):
        identity_assignment(iwasawa.metric(), {"alpha11": 2})


def test_star_squares_to_sign(nakamura_i, rng, metric_samples):
    alg = nakamura_i.algebra
    weights = list(nakamura_i.sectors)
    for matrix in metric_samples:
        star = HodgeStar(alg, matrix)
        for p, q in [(0, 0), (1, 0), (0, 1), (1, 1), (2, 1), (1, 3), (3, 3)]:
            alpha = random_form(alg, rng, p, q, weights)
            twice = star.star(star.star(alpha))
            sign = -1 if (p + q) % 2 else 1
            assert twice.close_to(as_numeric(alpha).scale(sign), 1e-9)


def test_star_maps_bidegree_and_weight(nakamura_i, metric_samples):
    alg = nakamura_i.algebra
    w = alg.unit_weight("w")
    star = HodgeStar(alg, metric_samples[1])
    out = star.star(alg.mono((1,), (2, 3), w))
    assert set(out.bidegrees()) == {(2, 1)}
    assert out.weights() == [(-1,)]


def test_inner_product_is_hermitian(iwasawa, rng, metric_samples):
    alg = iwasawa.algebra
    for matrix in metric_samples:
        star = HodgeStar(alg, matrix)
        a = random_form(alg, rng, 1, 2)
        b = random_form(alg, rng, 1, 2)
        assert abs(star.inner(a, b) - star.inner(b, a).conjugate()) < 1e-9
        if a:
            assert star.norm(a) > 0
    identity = HodgeStar(alg, np.eye(3))
    assert abs(identity.inner(alg.eta(1), alg.eta(1)) - 2.0) < 1e-12


def test_star_rejects_indefinite_metric(iwasawa):
    with pytest.raises(NotPositiveDefiniteError):
        HodgeStar(iwasawa.algebra, np.diag([1.0, -1.0, 1.0]))


@pytest.mark.parametrize("model_name", ["iwasawa", "nakamura-ii"])
def test_delbar_adjoint_is_an_adjoint(model_name, request, rng, metric_samples):
    model = request.getfixturevalue(model_name.replace("-", "_"))
    alg = model.algebra
    for matrix in metric_samples:
        star = HodgeStar(alg, matrix)
        for p, q in [(0, 1), (1, 1), (2, 2), (1, 3)]:
            alpha = random_form(alg, rng, p, q - 1, terms=4)
            beta = random_form(alg, rng, p, q, terms=4)
            lhs = star.inner(delbar(alpha), beta)
            rhs = star.inner(alpha, delbar_adjoint(beta, matrix, star))
            assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))


def test_surviving_nakamura_monomials_are_harmonic(nakamura_ii, metric_samples):
    alg = nakamura_ii.algebra
    for matrix in metric_samples:
        for holo in [(1, 2), (1, 3)]:
            report = harmonic_check(alg.mono(holo, (1, 2, 3)), matrix)
            assert report.harmonic
            assert report.delbar_max == 0.0
            assert report.adjoint_max <= report.tolerance


def test_non_closed_form_is_not_harmonic(iwasawa):
    report = harmonic_check(iwasawa.algebra.etabar(3), np.eye(3))
    assert not report.harmonic
    assert report.delbar_max == pytest.approx(1.0)


def _numeric_omega(algebra, matrix):
    omega = NumWForm.zero_over(algebra)
    for j in range(algebra.n):
        for k in range(algebra.n):
            if matrix[j, k]:
                omega.terms[(algebra.zero_weight, (j + 1,), (k + 1,))] = 0.5j * matrix[j, k]
    return omega


def test_star_of_one_is_the_volume_form(iwasawa, metric_samples):
    alg = iwasawa.algebra
    for matrix in metric_samples:
        volume = wedge_power(_numeric_omega(alg, matrix), 3).scale(1 / 6)
        assert hodge_star(alg.one(), matrix).close_to(volume, 1e-10)


def test_iwasawa_top_class_is_harmonic(iwasawa, metric_samples):
    alpha = iwasawa.algebra.mono((1, 2), (1, 2, 3))
    for matrix in metric_samples:
        report = harmonic_check(alpha, matrix)
        assert report.harmonic
        assert report.adjoint_max <= 1e-12
        assert dolbeault_laplacian(alpha, matrix).max_abs() <= 1e-9


def test_weighted_exact_form_is_not_harmonic(nakamura_i, metric_samples):
    alg = nakamura_i.algebra
    w = alg.unit_weight("w")
    alpha = delbar(alg.mono((1, 2), (2, 3), w))
    assert alpha == alg.mono((1, 2), (1, 2, 3), w)
    for matrix in metric_samples:
        report = harmonic_check(alpha, matrix)
        assert not report.harmonic
        assert report.delbar_max == 0.0
        assert report.adjoint_max > 1e-3
    report = harmonic_check(alpha, np.eye(3))
    assert report.adjoint_max == pytest.approx(2.0)


def test_laplacian_pairs_to_the_adjoint_norm(nakamura_i, metric_samples):
    alg = nakamura_i.algebra
    alpha = alg.mono((1, 2), (1, 2, 3), alg.unit_weight("w"))
    for matrix in metric_samples:
        star = HodgeStar(alg, matrix)
        laplacian = dolbeault_laplacian(alpha, matrix, star)
        adjoint_norm = star.norm(delbar_adjoint(alpha, matrix, star))
        assert laplacian.max_abs() > 1e-6
        assert star.inner(laplacian, alpha) == pytest.approx(adjoint_norm ** 2, rel=1e-9)


@pytest.mark.parametrize("model_name, holo, anti, weight", [
    ("iwasawa", (1, 2), (1, 2, 3), None),
    ("iwasawa", (), (3,), None),
    ("iwasawa", (1,), (1,), None),
    ("nakamura-ii", (1, 3), (1, 2, 3), None),
    ("nakamura-i", (1, 2), (1, 2, 3), "w"),
    ("nakamura-i", (2, 3), (1, 2, 3), None),
])
def test_harmonic_exactly_when_the_laplacian_vanishes(model_name, holo, anti, weight, request, metric_samples):
    model = request.getfixturevalue(model_name.replace("-", "_"))
    alg = model.algebra
    alpha = alg.mono(holo, anti, alg.unit_weight(weight) if weight else None)
    for matrix in metric_samples:
        report = harmonic_check(alpha, matrix)
        laplacian = dolbeault_laplacian(alpha, matrix)
        assert report.harmonic == (laplacian.max_abs() <= 1e-9)

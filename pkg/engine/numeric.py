"""
Numeric Verifier
Logic Layer Component

Independent finite-difference oracle for the balanced-deformation theorem.
∂̄_t on the deformed fibre is expressed on the central-fibre basis through
the frame endomorphism I − φ̄φ; its central difference in t is compared with
the symbolic residual R.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from config import config
from engine.calculus import (
    FrameEndo,
    VForm,
    contract,
    contract_conj,
    del_,
    delbar,
    extension_map,
    phi_phibar,
    phibar_phi,
)
from engine.forms import CoframeAlgebra, Key, NumWForm, WForm, as_numeric, bidegree
from engine.metrics import posdef_check, wedge_power
from engine.obstruction import DeformationCurve, MetricCurve, theorem_residual
from utils.errors import StructuralError

logger = logging.getLogger(__name__)


def _identity_minus(endo: FrameEndo) -> FrameEndo:
    return FrameEndo.identity(endo.algebra, endo.kind) - endo


def delbar_t(phi: VForm, alpha: WForm) -> NumWForm:
    """
    Inner form of ∂̄_t on the central-fibre basis:

        (I−φ̄φ)^{-1}⨼([∂, i_φ] + ∂̄)((I−φ̄φ)⨼α)

    Raises:
        SingularEndomorphismError: I − φ̄φ is not invertible (φ too large)
    """
    alpha = as_numeric(alpha)
    endo = _identity_minus(phibar_phi(phi))
    beta = endo.apply(alpha)
    inner = del_(contract(phi, beta)) - contract(phi, del_(beta)) + delbar(beta)
    return endo.inverse().apply(inner)


def del_t(phi: VForm, alpha: WForm) -> NumWForm:
    """(I−φφ̄)^{-1}⨼([∂̄, i_φ̄] + ∂)((I−φφ̄)⨼α); φ = 0 gives ∂α."""
    alpha = as_numeric(alpha)
    endo = _identity_minus(phi_phibar(phi))
    beta = endo.apply(alpha)
    inner = delbar(contract_conj(phi, beta)) - contract_conj(phi, delbar(beta)) + del_(beta)
    return endo.inverse().apply(inner)


def _require_function(f: WForm):
    bd = bidegree(f)
    if isinstance(bd, tuple) and bd != (0, 0):
        raise StructuralError(f"expected a weighted function, got bidegree {bd}")


def delbar_t_function(phi: VForm, f: WForm) -> NumWForm:
    """∂̄_t f = e^{i_φ̄}((I−φ̄φ)^{-1}⨼(∂̄ − φ⌟∂) f) for a weighted invariant function f."""
    _require_function(f)
    f = as_numeric(f)
    endo = _identity_minus(phibar_phi(phi))
    one_form = delbar(f) - contract(phi, del_(f))
    return extension_map(phi, endo.inverse().apply(one_form))


def del_t_function(phi: VForm, f: WForm) -> NumWForm:
    """∂_t f = e^{i_φ}((I−φφ̄)^{-1}⨼(∂ − φ̄⌟∂̄) f)."""
    _require_function(f)
    f = as_numeric(f)
    endo = _identity_minus(phi_phibar(phi))
    one_form = del_(f) - contract_conj(phi, delbar(f))
    return extension_map(phi, endo.inverse().apply(one_form))


def delbar_t_full(phi: VForm, alpha: WForm) -> NumWForm:
    """The outer extension map applied to delbar_t: the form on the deformed fibre."""
    return extension_map(phi, delbar_t(phi, alpha))


def extension_matrix(phi: VForm, domain: Sequence[Key]) -> Tuple[np.ndarray, List[Key]]:
    """Matrix of e^{i_φ|i_φ̄} on the given monomials, rows indexed by the returned keys."""
    algebra = phi.algebra
    images = []
    for key in domain:
        mono = NumWForm.zero_over(algebra)
        mono.terms[key] = 1 + 0j
        images.append(extension_map(phi, mono))
    rows = sorted({k for img in images for k in img.terms}, key=lambda k: (k[0], len(k[1]), k[1], k[2]))
    index = {k: r for r, k in enumerate(rows)}
    mat = np.zeros((len(rows), len(domain)), dtype=complex)
    for col, img in enumerate(images):
        for k, c in img.terms.items():
            mat[index[k], col] = c
    return mat, rows


def invert_extension(phi: VForm, image: WForm, domain: Sequence[Key]) -> NumWForm:
    """Solve e^{i_φ|i_φ̄}(x) = image for x supported on the domain monomials (least squares)."""
    mat, rows = extension_matrix(phi, domain)
    index = {k: r for r, k in enumerate(rows)}
    rhs = np.zeros(len(rows), dtype=complex)
    for k, c in as_numeric(image).terms.items():
        if k not in index:
            raise StructuralError("image has a component outside the extension of the domain")
        rhs[index[k]] = c
    x, *_ = np.linalg.lstsq(mat, rhs, rcond=None)
    out = NumWForm.zero_over(phi.algebra)
    out.terms = {k: complex(v) for k, v in zip(domain, x) if v}
    return out


def numeric_omega(algebra: CoframeAlgebra, metric_curve: MetricCurve, assign: Mapping[str, complex], t: float) -> NumWForm:
    values = dict(assign)
    values[metric_curve.t_var] = t
    return NumWForm.from_exact(metric_curve.omega(algebra), values)


def inner_form_at(
    algebra: CoframeAlgebra,
    metric_curve: MetricCurve,
    curve: DeformationCurve,
    assign: Mapping[str, complex],
    t: float,
) -> NumWForm:
    """delbar_t(φ(t), ω(t)^{n−1}) at one parameter value."""
    phi = curve.at(t, assign)
    omega = numeric_omega(algebra, metric_curve, assign, t)
    matrix = metric_curve.metric.numeric({**assign, metric_curve.t_var: t})
    if not posdef_check(matrix):
        logger.warning(f"Metric sample at t={t:g} is not positive definite")
    power = wedge_power(omega, algebra.n - 1) if algebra.n > 1 else as_numeric(algebra.one())
    return delbar_t(phi, power)


@dataclass
class FDReport:
    """Central-difference check of the theorem residual."""
    steps: List[float]
    derivatives: List[NumWForm]
    prediction: NumWForm
    errors: List[float]
    orders: List[Optional[float]]
    order: Optional[float]
    order_window: Tuple[float, float]
    agrees: bool
    notes: List[str] = field(default_factory=list)

    @property
    def order_ok(self) -> bool:
        if self.order is None:
            return True
        lo, hi = self.order_window
        return lo <= self.order <= hi

    @property
    def passed(self) -> bool:
        return self.agrees and self.order_ok


def build_fd_report(
    steps: Sequence[float],
    samples: Mapping[float, NumWForm],
    prediction: NumWForm,
) -> FDReport:
    """Assemble an FDReport from inner forms sampled at ±h for every step h."""
    cfg = config.numeric
    derivatives, errors = [], []
    for h in steps:
        fd = (samples[h] - samples[-h]).scale(1.0 / (2.0 * h))
        derivatives.append(fd)
        errors.append((fd - prediction).max_abs())

    notes: List[str] = []
    orders: List[Optional[float]] = []
    for (h1, e1), (h2, e2) in zip(zip(steps, errors), zip(steps[1:], errors[1:])):
        if e1 <= cfg.fd_noise_floor or e2 <= cfg.fd_noise_floor:
            orders.append(None)
        else:
            orders.append(math.log(e1 / e2) / math.log(h1 / h2))
    usable = [o for o in orders if o is not None]
    order = usable[-1] if usable else None
    if order is None:
        notes.append("errors at noise floor; convergence order not estimable")
        logger.warning("Finite-difference errors are below the noise floor; order not estimable")

    agrees = all(e <= cfg.fd_agree_factor * h + cfg.fd_noise_floor for h, e in zip(steps, errors))
    report = FDReport(
        steps=list(steps),
        derivatives=derivatives,
        prediction=prediction,
        errors=errors,
        orders=orders,
        order=order,
        order_window=tuple(cfg.fd_order_window),
        agrees=agrees,
        notes=notes,
    )
    logger.info(f"FD check: errors={['%.3g' % e for e in errors]} order={order}")
    return report


def fd_theorem_check(
    algebra: CoframeAlgebra,
    metric_curve: MetricCurve,
    curve: DeformationCurve,
    assign: Mapping[str, complex],
    steps: Optional[Sequence[float]] = None,
) -> FDReport:
    """
    Compare (inner(h) − inner(−h)) / 2h with R evaluated at the assignment,
    for each step h.
    """
    steps = list(steps or config.numeric.fd_steps)
    if any(h <= 0 for h in steps):
        raise StructuralError("finite-difference steps must be positive")
    prediction = NumWForm.from_exact(theorem_residual(algebra, metric_curve, curve), assign)
    samples: Dict[float, NumWForm] = {}
    for h in steps:
        for s in (h, -h):
            samples[s] = inner_form_at(algebra, metric_curve, curve, assign, s)
    return build_fd_report(steps, samples, prediction)

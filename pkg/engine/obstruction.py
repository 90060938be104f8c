"""
Obstruction Engine
Logic Layer Component

First-order obstruction to curves of balanced metrics along a deformation
φ(t) of the complex structure:

    Θ = ∂ i_{φ′(0)}(ω^{n−1})                       (obstruction form)
    R = Θ + ∂̄((ω^{n−1}(0))′)                      (theorem residual)

A balanced family along φ(t) forces R = 0, and hence the Dolbeault class of
Θ to vanish. Verdicts are first-order necessary conditions only.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional

from config import config
from engine.calculus import VForm, contract, del_, delbar, mc_residual
from engine.cohomology import ClassResidual, reduce_class
from engine.forms import CoframeAlgebra, WForm
from engine.metrics import HermMetric, omega_from_metric, posdef_check, wedge_power
from utils.errors import NotPositiveDefiniteError, StructuralError

logger = logging.getLogger(__name__)

T_VAR = "t"

OBSTRUCTED = "obstructed"
NOT_OBSTRUCTED = "no-first-order-obstruction"
CONDITIONAL = "conditional"

SCOPE_CAVEAT = (
    "Verdicts are first-order necessary conditions. Nonvanishing is certified in the "
    "invariant character-weighted subcomplex only."
)


class DeformationCurve:
    """
    φ(t), a (0,1)-vector form whose coefficients are polynomials in the real
    parameter t. φ(0) must vanish; the Maurer–Cartan residual is computed once
    and kept as a flag.
    """

    def __init__(self, name: str, phi: VForm, t_var: str = T_VAR, check_mc: bool = True):
        self.name = name
        self.phi = phi
        self.t_var = t_var
        self.algebra = phi.algebra
        if t_var not in self.algebra.var_table:
            raise StructuralError(f"curve parameter {t_var!r} is not declared")
        if not phi.t_coefficient(0, t_var).is_zero():
            raise StructuralError(f"curve {name!r} does not vanish at t = 0")
        self.mc_residual: Optional[VForm] = mc_residual(phi) if check_mc else None
        if self.mc_residual is not None and not self.mc_residual.is_zero():
            logger.warning(f"Curve {name!r} does not satisfy the Maurer-Cartan equation")

    @property
    def mc_ok(self) -> Optional[bool]:
        return None if self.mc_residual is None else self.mc_residual.is_zero()

    @property
    def derivative(self) -> VForm:
        """φ′(0), the t-linear part."""
        return VForm(self.algebra, self.phi.t_coefficient(1, self.t_var).components)

    def at(self, t: float, assign: Mapping[str, complex]) -> VForm:
        """Numeric φ(t) at a direction assignment."""
        values = dict(assign)
        values[self.t_var] = t
        return self.phi.evaluate(values)

    def __repr__(self) -> str:
        return f"DeformationCurve({self.name}: {self.phi})"


class MetricCurve:
    """
    ω(t) = ω + t·ω₁ + …, given by a Hermitian matrix with entries polynomial
    in t. The constant curve has no t dependence.
    """

    def __init__(self, name: str, metric: HermMetric, t_var: str = T_VAR):
        self.name = name
        self.metric = metric
        self.t_var = t_var

    @classmethod
    def constant(cls, metric: HermMetric) -> "MetricCurve":
        return cls(f"{metric.name}(const)", metric)

    def at_zero(self) -> HermMetric:
        if self.t_var not in self.metric.var_table:
            return self.metric
        matrix = [[entry.coefficient_in(self.t_var, 0) for entry in row] for row in self.metric.matrix]
        return HermMetric(matrix, self.metric.convention, self.metric.name)

    def is_constant(self) -> bool:
        if self.t_var not in self.metric.var_table:
            return True
        return all(self.t_var not in entry.variables() for row in self.metric.matrix for entry in row)

    def omega(self, algebra: CoframeAlgebra) -> WForm:
        """ω(t) with t kept symbolic."""
        return omega_from_metric(algebra, self.metric)

    def power_derivative(self, algebra: CoframeAlgebra) -> WForm:
        """(ω^{n−1}(0))′: the t-linear part of ω(t)^{n−1}."""
        if self.is_constant():
            return algebra.zero()
        power = wedge_power(self.omega(algebra), algebra.n - 1)
        return power.map_coefficients(lambda p: p.coefficient_in(self.t_var, 1))

    def __repr__(self) -> str:
        return f"MetricCurve({self.name})"


@dataclass
class Verdict:
    """Outcome of evaluating the obstruction conditions at one assignment."""
    verdict: str
    values: List[complex]
    fired: List[int]
    tolerance: float
    assignment: Dict[str, complex] = field(default_factory=dict)

    @property
    def obstructed(self) -> bool:
        return self.verdict == OBSTRUCTED


@dataclass
class ObstructionReport:
    """Everything one obstruction run produces, with provenance."""
    algebra: str
    convention: str
    curve: str
    metric: str
    theta: WForm
    theorem_residual: WForm
    class_residual: ClassResidual
    mc_ok: Optional[bool]
    verdicts: List[Verdict] = field(default_factory=list)
    caveats: List[str] = field(default_factory=lambda: [SCOPE_CAVEAT])


def _omega_power(algebra: CoframeAlgebra, omega: WForm) -> WForm:
    return wedge_power(omega, algebra.n - 1) if algebra.n > 1 else algebra.one()


def first_order_obstruction(algebra: CoframeAlgebra, omega: WForm, direction: VForm) -> WForm:
    """Θ = ∂(i_{φ′(0)}(ω^{n−1}))."""
    theta = del_(contract(direction, _omega_power(algebra, omega)))
    logger.debug(f"Obstruction form has {len(theta.terms)} term(s)")
    return theta


def theorem_residual(algebra: CoframeAlgebra, metric_curve: MetricCurve, curve: DeformationCurve) -> WForm:
    """R = Θ + ∂̄((ω^{n−1}(0))′), which must vanish if every ω_t is balanced."""
    if curve.mc_ok is False:
        logger.warning(f"Theorem residual requested for curve {curve.name!r}, which fails Maurer-Cartan")
    omega0 = omega_from_metric(algebra, metric_curve.at_zero())
    theta = first_order_obstruction(algebra, omega0, curve.derivative)
    return theta + delbar(metric_curve.power_derivative(algebra))


def corollary_conditions(algebra: CoframeAlgebra, omega: WForm, direction: VForm) -> ClassResidual:
    """Reduce Θ modulo ∂̄-exact forms; the surviving coefficients are the conditions."""
    return reduce_class(first_order_obstruction(algebra, omega, direction))


def symbolic_verdict(conditions: ClassResidual) -> str:
    """
    Verdict before any assignment: no conditions means no obstruction, a
    nonzero constant condition obstructs every direction and metric, and
    anything else depends on the parameters.
    """
    if conditions.vanishes:
        return NOT_OBSTRUCTED
    if any(c.is_constant() for c in conditions.conditions):
        return OBSTRUCTED
    return CONDITIONAL


def verdict(
    conditions: ClassResidual,
    assign: Mapping[str, complex],
    metric: Optional[HermMetric] = None,
    tol: Optional[float] = None,
) -> Verdict:
    """
    Obstructed iff some condition is numerically nonzero at the assignment.

    Raises:
        NotPositiveDefiniteError: the metric evaluated at the assignment is not positive definite
        AssignmentError: a condition variable is unassigned or a conjugate pair is inconsistent
    """
    tol = config.numeric.verdict_tol if tol is None else tol
    if metric is not None:
        values_matrix = metric.numeric(assign)
        if not posdef_check(values_matrix):
            raise NotPositiveDefiniteError(f"metric {metric.name} is not positive definite at this assignment")
    values: List[complex] = []
    fired: List[int] = []
    for k, cond in enumerate(conditions.conditions):
        value = cond.evaluate(assign)
        values.append(value)
        if abs(value) > tol:
            fired.append(k)
    label = OBSTRUCTED if fired else NOT_OBSTRUCTED
    logger.info(f"Verdict: {label} ({len(fired)} of {len(values)} condition(s) nonzero)")
    return Verdict(verdict=label, values=values, fired=fired, tolerance=tol, assignment=dict(assign))


def verdict_sweep(
    conditions: ClassResidual,
    directions: List[Mapping[str, complex]],
    metric_samples: List[Mapping[str, complex]],
    metric: Optional[HermMetric] = None,
) -> List[Verdict]:
    """Verdicts for every (direction, metric sample) pair, directions outermost."""
    out = []
    for direction in directions:
        for sample in metric_samples:
            merged = dict(sample)
            merged.update(direction)
            out.append(verdict(conditions, merged, metric))
    return out


def obstruction_report(
    algebra: CoframeAlgebra,
    metric_curve: MetricCurve,
    curve: DeformationCurve,
) -> ObstructionReport:
    """Θ, R and the class reduction for one (metric curve, deformation curve) pair."""
    metric0 = metric_curve.at_zero()
    omega0 = omega_from_metric(algebra, metric0)
    theta = first_order_obstruction(algebra, omega0, curve.derivative)
    residual = theta + delbar(metric_curve.power_derivative(algebra))
    return ObstructionReport(
        algebra=algebra.name,
        convention=metric0.convention,
        curve=curve.name,
        metric=metric_curve.name,
        theta=theta,
        theorem_residual=residual,
        class_residual=reduce_class(theta),
        mc_ok=curve.mc_ok,
    )


def convention_difference(algebra: CoframeAlgebra, metric: HermMetric, direction: VForm) -> WForm:
    """Θ(paper-literal) − Θ(hermitian-standard), termwise."""
    literal = first_order_obstruction(
        algebra, omega_from_metric(algebra, metric.with_convention("paper-literal")), direction
    )
    standard = first_order_obstruction(
        algebra, omega_from_metric(algebra, metric.with_convention("hermitian-standard")), direction
    )
    return literal - standard

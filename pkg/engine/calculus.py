"""
Invariant Calculus
Logic Layer Component

Differential operators and contraction calculus on WForms: d, ∂, ∂̄, the
contractions i_φ and i_φ̄, simultaneous contraction, the extension map, the
frame-adapted bracket of vector forms and the Maurer–Cartan residual.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from config import config
from engine.forms import (
    ANY,
    MIXED,
    CoframeAlgebra,
    Index,
    Key,
    NumWForm,
    WForm,
    bidegree,
    form_conj,
    form_text,
    wedge,
    wedge_terms,
)
from engine.scalars import GaussRat
from utils.errors import BidegreeError, SingularEndomorphismError, StructuralError

logger = logging.getLogger(__name__)


def _accumulate(out: Dict[Key, object], key: Key, value) -> None:
    out[key] = out[key] + value if key in out else value


def _unit(template: WForm):
    return 1 + 0j if isinstance(template, NumWForm) else template.algebra.poly(1)


def _basis_form(template: WForm, holo: Index = (), anti: Index = (), weight=None) -> WForm:
    weight = template.algebra.zero_weight if weight is None else weight
    return template._new({(weight, tuple(holo), tuple(anti)): _unit(template)})


# exterior derivative --------------------------------------------------------

def _d_monomial(algebra: CoframeAlgebra, holo: Index, anti: Index) -> Dict[Key, GaussRat]:
    """d(η^H ∧ η̄^A) by the Leibniz rule over the structure equations (cached)."""
    cached = algebra.d_cache.get((holo, anti))
    if cached is not None:
        return cached
    zero = algebra.zero_weight
    factors = [(True, i) for i in holo] + [(False, j) for j in anti]

    def product(part) -> Dict[Key, GaussRat]:
        terms: Dict[Key, GaussRat] = {(zero, (), ()): GaussRat(1)}
        for is_holo, idx in part:
            single = {(zero, (idx,), ()): GaussRat(1)} if is_holo else {(zero, (), (idx,)): GaussRat(1)}
            terms = wedge_terms(terms, single)
        return terms

    total: Dict[Key, GaussRat] = {}
    for k, (is_holo, idx) in enumerate(factors):
        d_factor = algebra.d_eta_terms(idx) if is_holo else algebra.d_etabar_terms(idx)
        if not d_factor:
            continue
        piece = wedge_terms(wedge_terms(product(factors[:k]), d_factor), product(factors[k + 1:]))
        for key, c in piece.items():
            _accumulate(total, key, -c if k % 2 else c)
    total = {key: c for key, c in total.items() if c}
    algebra.d_cache[(holo, anti)] = total
    return total


def _dlog_terms(algebra: CoframeAlgebra, weight) -> Dict[Key, GaussRat]:
    zero = algebra.zero_weight
    terms: Dict[Key, GaussRat] = {}
    for i, c in enumerate(algebra.dlog10(weight), start=1):
        if c:
            terms[(zero, (i,), ())] = c
    for i, c in enumerate(algebra.dlog01(weight), start=1):
        if c:
            terms[(zero, (), (i,))] = c
    return terms


def dlog_form(algebra: CoframeAlgebra, weight) -> WForm:
    """The closed 1-form dlog(e^w), split into its declared (1,0) and (0,1) parts."""
    return WForm(algebra, {key: algebra.poly(c) for key, c in _dlog_terms(algebra, weight).items()})


def d(alpha: WForm) -> WForm:
    """d(e^w·m) = e^w(dlog(w)∧m + dm); coefficients are constants on the invariant basis."""
    algebra = alpha.algebra
    zero = algebra.zero_weight
    out: Dict[Key, object] = {}
    for (w, h, a), c in alpha.terms.items():
        for (_, h2, a2), s in _d_monomial(algebra, h, a).items():
            _accumulate(out, (w, h2, a2), c * s)
        if any(w):
            for (_, h2, a2), s in wedge_terms(_dlog_terms(algebra, w), {(zero, h, a): GaussRat(1)}).items():
                if s:
                    _accumulate(out, (w, h2, a2), c * s)
    return alpha._new(out)


def _require_homogeneous(alpha: WForm, op: str):
    bd = bidegree(alpha)
    if bd == MIXED:
        raise BidegreeError(f"{op} needs a form of pure bidegree, got {alpha.bidegrees()}")
    return bd


def del_(alpha: WForm) -> WForm:
    """∂: the (p+1, q) part of d on a (p, q)-form."""
    bd = _require_homogeneous(alpha, "del")
    if bd == ANY:
        return alpha._new({})
    p, q = bd
    return d(alpha).part(p + 1, q)


def delbar(alpha: WForm) -> WForm:
    """∂̄: the (p, q+1) part of d on a (p, q)-form."""
    bd = _require_homogeneous(alpha, "delbar")
    if bd == ANY:
        return alpha._new({})
    p, q = bd
    return d(alpha).part(p, q + 1)


@dataclass
class AlgebraReport:
    """Outcome of d_squared_check."""
    algebra: str
    passed: bool
    checked: List[str] = field(default_factory=list)
    violations: List[str] = field(default_factory=list)


def d_squared_check(algebra: CoframeAlgebra) -> AlgebraReport:
    """
    Check d∘d = 0 on every η^k and η̄^k and that each character has a closed,
    unitary log-differential. Violations name the offending generator.
    """
    report = AlgebraReport(algebra=algebra.name, passed=True)
    for k in range(1, algebra.n + 1):
        for label, form in ((f"e{k}", algebra.eta(k)), (f"~e{k}", algebra.etabar(k))):
            report.checked.append(label)
            dd = d(d(form))
            if dd:
                report.violations.append(f"{label}: d(d {label}) = {form_text(dd)}")
    for ch in algebra.characters:
        label = f"char {ch.name}"
        report.checked.append(label)
        closed = d(dlog_form(algebra, algebra.unit_weight(ch.name)))
        if closed:
            report.violations.append(f"{label}: d(dlog) = {form_text(closed)}")
        if not ch.is_unitary():
            report.violations.append(f"{label}: conj(dlog10) != -dlog01")
    report.passed = not report.violations
    if report.passed:
        logger.info(f"Algebra {algebra.name or '(anonymous)'}: d^2 = 0 on all generators")
    else:
        logger.warning(f"Algebra {algebra.name or '(anonymous)'} fails: {report.violations}")
    return report


# contractions ---------------------------------------------------------------

def interior(i: int, alpha: WForm) -> WForm:
    """i_{Z_i}: remove η^i from the holomorphic factors."""
    out: Dict[Key, object] = {}
    for (w, h, a), c in alpha.terms.items():
        if i in h:
            k = h.index(i)
            _accumulate(out, (w, h[:k] + h[k + 1:], a), -c if k % 2 else c)
    return alpha._new(out)


def interior_bar(i: int, alpha: WForm) -> WForm:
    """i_{Z̄_i}: remove η̄^i, passing over every holomorphic factor."""
    out: Dict[Key, object] = {}
    for (w, h, a), c in alpha.terms.items():
        if i in a:
            k = a.index(i)
            _accumulate(out, (w, h, a[:k] + a[k + 1:]), -c if (len(h) + k) % 2 else c)
    return alpha._new(out)


class VForm:
    """
    A (0,q)-form with values in the (1,0) frame: Σ_i components[i-1] ⊗ Z_i.

    Deformation parameters φ(t) are the q = 1 case; brackets and
    Maurer–Cartan residuals are q = 2.
    """

    __slots__ = ("algebra", "components")

    def __init__(self, algebra: CoframeAlgebra, components: Sequence[WForm], q: Optional[int] = 1):
        if len(components) != algebra.n:
            raise StructuralError(f"vector form needs {algebra.n} components, got {len(components)}")
        for i, comp in enumerate(components, start=1):
            if comp.algebra is not algebra:
                raise StructuralError("vector form component over a different algebra")
            if q is None:
                continue
            for p2, q2 in comp.bidegrees():
                if (p2, q2) != (0, q):
                    raise BidegreeError(f"component of Z{i} has bidegree ({p2},{q2}), expected (0,{q})")
        self.algebra = algebra
        self.components: Tuple[WForm, ...] = tuple(components)

    @classmethod
    def zero(cls, algebra: CoframeAlgebra, numeric: bool = False, q: int = 1) -> "VForm":
        blank = NumWForm.zero_over(algebra) if numeric else algebra.zero()
        return cls(algebra, [blank] * algebra.n, q=q)

    @classmethod
    def from_terms(cls, algebra: CoframeAlgebra, terms: Iterable[Tuple[int, WForm]], q: int = 1) -> "VForm":
        comps: List[WForm] = [algebra.zero() for _ in range(algebra.n)]
        for i, form in terms:
            if not 1 <= i <= algebra.n:
                raise StructuralError(f"frame index Z{i} out of range 1..{algebra.n}")
            comps[i - 1] = comps[i - 1] + form if comps[i - 1] else form
        return cls(algebra, comps, q=q)

    @property
    def q(self) -> Optional[int]:
        for comp in self.components:
            degs = comp.bidegrees()
            if degs:
                return degs[0][1]
        return None

    def component(self, i: int) -> WForm:
        return self.components[i - 1]

    def __add__(self, other: "VForm") -> "VForm":
        return VForm(self.algebra, [a + b for a, b in zip(self.components, other.components)], q=None)

    def __sub__(self, other: "VForm") -> "VForm":
        return VForm(self.algebra, [a - b for a, b in zip(self.components, other.components)], q=None)

    def __neg__(self) -> "VForm":
        return VForm(self.algebra, [-a for a in self.components], q=None)

    def scale(self, factor) -> "VForm":
        return VForm(self.algebra, [a.scale(factor) for a in self.components], q=None)

    def map_coefficients(self, fn) -> "VForm":
        return VForm(self.algebra, [a.map_coefficients(fn) for a in self.components], q=None)

    def __bool__(self) -> bool:
        return any(self.components)

    def is_zero(self) -> bool:
        return not self

    def __eq__(self, other) -> bool:
        if not isinstance(other, VForm):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def conj_components(self) -> List[WForm]:
        """Components of φ̄, a (q,0)-form valued in the antiholomorphic frame."""
        return [form_conj(a) for a in self.components]

    def is_numeric(self) -> bool:
        return any(isinstance(a, NumWForm) for a in self.components)

    def t_coefficient(self, power: int, var: str = "t") -> "VForm":
        """Coefficient of t**power in every component."""
        return self.map_coefficients(lambda p: p.coefficient_in(var, power))

    def evaluate(self, assign: Mapping[str, complex]) -> "VForm":
        values = self.algebra.var_table.complete_assignment(assign)
        return VForm(self.algebra, [NumWForm.from_exact(a, values) for a in self.components], q=None)

    def text(self, dsl: bool = False) -> str:
        parts = [f"({form_text(a, dsl)}) @ Z{i}" for i, a in enumerate(self.components, start=1) if a]
        return " + ".join(parts) or "0"

    def __str__(self) -> str:
        return self.text()

    def __repr__(self) -> str:
        return f"VForm({self})"


def contract(phi: VForm, alpha: WForm) -> WForm:
    """i_φ(α) = Σ_i φ^i ∧ i_{Z_i}(α); (p,q) goes to (p−1,q+1)."""
    out = alpha._new({})
    for i, comp in enumerate(phi.components, start=1):
        if comp:
            inner = interior(i, alpha)
            if inner:
                out = out + wedge(comp, inner)
    return out


def contract_conj(phi: VForm, alpha: WForm) -> WForm:
    """i_φ̄(α) = Σ_i conj(φ^i) ∧ i_{Z̄_i}(α); (p,q) goes to (p+1,q−1)."""
    out = alpha._new({})
    for i, comp in enumerate(phi.components, start=1):
        if comp:
            inner = interior_bar(i, alpha)
            if inner:
                out = out + wedge(form_conj(comp), inner)
    return out


def substitute(
    alpha: WForm,
    holo_images: Optional[Sequence[WForm]] = None,
    anti_images: Optional[Sequence[WForm]] = None,
) -> WForm:
    """
    Factorwise substitution: every η^i becomes holo_images[i-1] and every
    η̄^j becomes anti_images[j-1] (None keeps the factor). Weights and
    coefficients of α multiply through.
    """
    zero = alpha.algebra.zero_weight
    out: Dict[Key, object] = {}
    for (w, h, a), c in alpha.terms.items():
        piece: Dict[Key, object] = {(w, (), ()): c}
        for i in h:
            img = holo_images[i - 1].terms if holo_images is not None else {(zero, (i,), ()): 1}
            piece = wedge_terms(piece, img)
        for j in a:
            img = anti_images[j - 1].terms if anti_images is not None else {(zero, (), (j,)): 1}
            piece = wedge_terms(piece, img)
        for key, value in piece.items():
            _accumulate(out, key, value)
    return alpha._new(out)


def simcontract(phi: VForm, alpha: WForm) -> WForm:
    """(I+φ+φ̄)⨼α: η^i ↦ η^i + φ^i and η̄^j ↦ η̄^j + φ̄^j on every factor at once."""
    template = phi.components[0]
    holo = [_basis_form(template, (i,), ()) + phi.components[i - 1] for i in range(1, phi.algebra.n + 1)]
    anti = [_basis_form(template, (), (j,)) + c for j, c in enumerate(phi.conj_components(), start=1)]
    return substitute(alpha, holo, anti)


def _exp_contraction(op, phi: VForm, alpha: WForm, depth: int) -> WForm:
    total = alpha
    current = alpha
    for k in range(1, depth + 1):
        current = op(phi, current).scale(GaussRat(Fraction(1, k)))
        if not current:
            break
        total = total + current
    return total


def extension_map(phi: VForm, alpha: WForm) -> WForm:
    """
    e^{i_φ|i_φ̄}(α): e^{i_φ} on the holomorphic factors of each monomial and
    e^{i_φ̄} on the antiholomorphic ones, each a finite sum of iterated
    contractions with 1/k! weights.
    """
    out = alpha._new({})
    for (w, h, a), c in alpha.terms.items():
        holo_part = alpha._new({(w, h, ()): c})
        anti_part = _basis_form(alpha, (), a)
        out = out + wedge(
            _exp_contraction(contract, phi, holo_part, len(h)),
            _exp_contraction(contract_conj, phi, anti_part, len(a)),
        )
    return out


# frame endomorphisms --------------------------------------------------------

class FrameEndo:
    """
    Endomorphism of the holomorphic (kind "holo") or antiholomorphic (kind
    "antiholo") coframe. images[j-1] is the image of η^j, resp. η̄^j; matrix
    entries are weighted scalars.
    """

    KINDS = ("holo", "antiholo")

    def __init__(self, algebra: CoframeAlgebra, images: Sequence[WForm], kind: str):
        if kind not in self.KINDS:
            raise StructuralError(f"unknown frame kind {kind!r}")
        if len(images) != algebra.n:
            raise StructuralError("frame endomorphism needs one image per coframe element")
        self.algebra = algebra
        self.images: Tuple[WForm, ...] = tuple(images)
        self.kind = kind

    @classmethod
    def identity(cls, algebra: CoframeAlgebra, kind: str, numeric: bool = True) -> "FrameEndo":
        template = NumWForm.zero_over(algebra) if numeric else algebra.zero()
        if kind == "holo":
            images = [_basis_form(template, (i,), ()) for i in range(1, algebra.n + 1)]
        else:
            images = [_basis_form(template, (), (i,)) for i in range(1, algebra.n + 1)]
        return cls(algebra, images, kind)

    def __add__(self, other: "FrameEndo") -> "FrameEndo":
        return FrameEndo(self.algebra, [a + b for a, b in zip(self.images, other.images)], self.kind)

    def __sub__(self, other: "FrameEndo") -> "FrameEndo":
        return FrameEndo(self.algebra, [a - b for a, b in zip(self.images, other.images)], self.kind)

    def apply(self, alpha: WForm) -> WForm:
        """Simultaneous substitution on every factor of this endomorphism's kind."""
        if self.kind == "holo":
            return substitute(alpha, holo_images=self.images)
        return substitute(alpha, anti_images=self.images)

    def compose(self, other: "FrameEndo") -> "FrameEndo":
        """self ∘ other."""
        return FrameEndo(self.algebra, [self.apply(img) for img in other.images], self.kind)

    def entry(self, k: int, j: int) -> Dict[Tuple[int, ...], object]:
        """Matrix entry (k, j) as weight -> coefficient."""
        out = {}
        for (w, h, a), c in self.images[j - 1].terms.items():
            idx = h if self.kind == "holo" else a
            if idx == (k,):
                out[w] = c
        return out

    def is_weightless(self) -> bool:
        zero = self.algebra.zero_weight
        return all(w == zero for img in self.images for w, _, _ in img.terms)

    def max_abs(self) -> float:
        return max((abs(complex(c)) for img in self.images for c in img.terms.values()), default=0.0)

    def inverse(self) -> "FrameEndo":
        """
        Numeric inverse. Weightless matrices go through numpy.linalg.inv with a
        condition-number guard; weighted ones through the Neumann series of
        I − self, which needs spectral radius below 1.

        Raises:
            SingularEndomorphismError: the matrix is singular or ill conditioned,
                or the series does not converge
        """
        n = self.algebra.n
        if not all(isinstance(img, NumWForm) for img in self.images):
            raise StructuralError("frame endomorphism inverse needs numeric entries")
        identity = FrameEndo.identity(self.algebra, self.kind)
        zero = self.algebra.zero_weight

        if self.is_weightless():
            mat = np.zeros((n, n), dtype=complex)
            for k in range(1, n + 1):
                for j in range(1, n + 1):
                    mat[k - 1, j - 1] = self.entry(k, j).get(zero, 0)
            cond = np.linalg.cond(mat)
            if not np.isfinite(cond) or cond > config.numeric.singular_cond:
                raise SingularEndomorphismError(f"I - phibar.phi is singular (condition number {cond:.3g})")
            inv = np.linalg.inv(mat)
            images = []
            for j in range(n):
                img = NumWForm.zero_over(self.algebra)
                for k in range(n):
                    if inv[k, j]:
                        idx = ((k + 1,), ()) if self.kind == "holo" else ((), (k + 1,))
                        img.terms[(zero,) + idx] = complex(inv[k, j])
                images.append(img)
            return FrameEndo(self.algebra, images, self.kind)

        rest = identity - self
        bound = np.zeros((n, n))
        for k in range(1, n + 1):
            for j in range(1, n + 1):
                bound[k - 1, j - 1] = sum(abs(c) for c in rest.entry(k, j).values())
        radius = max(abs(np.linalg.eigvals(bound))) if n else 0.0
        if radius >= 1.0:
            raise SingularEndomorphismError(f"weighted frame endomorphism not invertible by series (radius {radius:.3g})")
        result = identity
        power = identity
        for _ in range(1000):
            power = rest.compose(power)
            result = result + power
            if power.max_abs() < 1e-17:
                return result
        raise SingularEndomorphismError("Neumann series for I - phibar.phi did not converge")


def phibar_phi(phi: VForm) -> FrameEndo:
    """φ̄φ := φ⨼φ̄ on the antiholomorphic coframe: η̄^j ↦ i_φ(φ̄^j)."""
    images = [contract(phi, c) for c in phi.conj_components()]
    return FrameEndo(phi.algebra, images, "antiholo")


def phi_phibar(phi: VForm) -> FrameEndo:
    """φφ̄ := φ̄⨼φ on the holomorphic coframe: η^j ↦ i_φ̄(φ^j)."""
    images = [contract_conj(phi, c) for c in phi.components]
    return FrameEndo(phi.algebra, images, "holo")


# bracket and Maurer–Cartan ---------------------------------------------------

def frame_bracket(algebra: CoframeAlgebra, i: int, j: int) -> Dict[int, GaussRat]:
    """[Z_i, Z_j] = Σ_k −c^k_{ij} Z_k where dη^k contains c^k_{ij} η^i∧η^j."""
    if i == j:
        return {}
    lo, hi = min(i, j), max(i, j)
    sign = 1 if i < j else -1
    out = {}
    for k in range(1, algebra.n + 1):
        c = algebra.d_eta_terms(k).get((algebra.zero_weight, (lo, hi), ()))
        if c:
            out[k] = -c * sign
    return out


def lie_derivative(i: int, beta: WForm) -> WForm:
    """L_{Z_i}β = i_{Z_i} dβ for a (0,q)-form β."""
    return interior(i, d(beta))


def bracket(phi: VForm, psi: VForm) -> VForm:
    """
    Frame-adapted bracket of two (0,1)-vector forms:

        Σ (φ^i∧L_{Z_i}ψ^j + ψ^i∧L_{Z_i}φ^j) ⊗ Z_j + Σ φ^i∧ψ^j ⊗ [Z_i, Z_j]
    """
    algebra = phi.algebra
    if psi.algebra is not algebra:
        raise StructuralError("bracket of vector forms over different algebras")
    n = algebra.n
    comps: List[WForm] = [phi.components[0]._new({}) for _ in range(n)]
    for i in range(1, n + 1):
        phi_i, psi_i = phi.component(i), psi.component(i)
        for j in range(1, n + 1):
            if phi_i:
                comps[j - 1] = comps[j - 1] + wedge(phi_i, lie_derivative(i, psi.component(j)))
            if psi_i:
                comps[j - 1] = comps[j - 1] + wedge(psi_i, lie_derivative(i, phi.component(j)))
            if phi_i:
                structure = frame_bracket(algebra, i, j)
                if structure:
                    both = wedge(phi_i, psi.component(j))
                    for k, c in structure.items():
                        comps[k - 1] = comps[k - 1] + both.scale(c)
    return VForm(algebra, comps, q=None)


def delbar_frame(algebra: CoframeAlgebra, j: int) -> Dict[Tuple[int, int], GaussRat]:
    """∂̄Z_j = Σ C^k_{jm̄} η̄^m ⊗ Z_k, as {(m, k): C}, from the (1,1) part of dη^k."""
    out = {}
    zero = algebra.zero_weight
    for k in range(1, algebra.n + 1):
        for (w, h, a), c in algebra.d_eta_terms(k).items():
            if w == zero and h == (j,) and len(a) == 1:
                out[(a[0], k)] = c
    return out


def delbar_vector(phi: VForm) -> VForm:
    """∂̄ on T^{1,0}-valued (0,q)-forms: Σ ∂̄φ^j ⊗ Z_j + (−1)^q φ^j ∧ ∂̄Z_j."""
    algebra = phi.algebra
    q = phi.q or 0
    comps = [delbar(c) for c in phi.components]
    sign = -1 if q % 2 else 1
    for j, phi_j in enumerate(phi.components, start=1):
        if not phi_j:
            continue
        for (m, k), c in delbar_frame(algebra, j).items():
            term = wedge(phi_j, _basis_form(phi_j, (), (m,))).scale(c)
            comps[k - 1] = comps[k - 1] + (term if sign > 0 else -term)
    return VForm(algebra, comps, q=None)


def mc_residual(phi: VForm) -> VForm:
    """∂̄φ − ½[φ, φ]; zero exactly when φ satisfies the Maurer–Cartan equation."""
    half = GaussRat(Fraction(1, 2))
    return delbar_vector(phi) - bracket(phi, phi).scale(half)

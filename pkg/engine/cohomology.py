"""
Sector Cohomology
Logic Layer Component

Exact linear algebra on the character-weighted invariant ∂̄-complex. Each
weight sector is a finite-dimensional complex with constant GaussRat
matrices; forms with polynomial coefficients are reduced modulo ∂̄-images by
applying a constant projection to their coefficient vectors.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from engine import linalg
from engine.calculus import delbar
from engine.forms import CoframeAlgebra, Index, Weight, WForm, bidegree, monomial_text
from engine.scalars import GaussPoly
from utils.errors import BidegreeError, StructuralError

logger = logging.getLogger(__name__)


@dataclass
class SectorComplex:
    """∂̄ around bidegree (p, q) in one weight sector."""
    algebra: CoframeAlgebra
    weight: Weight
    p: int
    q: int
    basis: List[Tuple[Index, Index]]
    basis_prev: List[Tuple[Index, Index]]
    basis_next: List[Tuple[Index, Index]]
    d_in: np.ndarray    # (p, q−1) → (p, q)
    d_out: np.ndarray   # (p, q) → (p, q+1)

    @property
    def kernel_dimension(self) -> int:
        return len(self.basis) - linalg.rank(self.d_out)

    @property
    def image_dimension(self) -> int:
        return linalg.rank(self.d_in)

    @property
    def cohomology_dimension(self) -> int:
        return self.kernel_dimension - self.image_dimension

    def composes_to_zero(self) -> bool:
        if not self.basis_prev or not self.basis_next:
            return True
        return linalg.is_zero(linalg.matmul(self.d_out, self.d_in))

    def vector(self, form: WForm) -> List[GaussPoly]:
        """Coefficient vector of the weight-sector (p, q) part of a form."""
        zero_poly = GaussPoly.zero(self.algebra.var_table)
        return [self.algebra.poly(form.terms.get((self.weight, h, a), zero_poly)) for h, a in self.basis]

    def form(self, vector: Sequence, basis: Optional[List[Tuple[Index, Index]]] = None) -> WForm:
        basis = self.basis if basis is None else basis
        terms = {(self.weight, h, a): self.algebra.poly(c) for (h, a), c in zip(basis, vector)}
        return WForm(self.algebra, terms)


def _delbar_matrix(algebra: CoframeAlgebra, weight: Weight, source, target) -> np.ndarray:
    index = {key: r for r, key in enumerate(target)}
    m = linalg.zeros(len(target), len(source))
    for col, (h, a) in enumerate(source):
        image = delbar(algebra.mono(h, a, weight))
        for (w, h2, a2), c in image.terms.items():
            if not c.is_constant():
                raise StructuralError("structure constants must be constants")
            m[index[(h2, a2)], col] = c.constant_term()
    return m


def build_sector(algebra: CoframeAlgebra, weight: Weight, p: int, q: int) -> SectorComplex:
    """∂̄ matrices into and out of the (p, q) forms of one weight sector."""
    weight = tuple(weight)
    basis = algebra.basis(p, q)
    prev = algebra.basis(p, q - 1) if q >= 1 else []
    nxt = algebra.basis(p, q + 1) if q < algebra.n else []
    sector = SectorComplex(
        algebra=algebra,
        weight=weight,
        p=p,
        q=q,
        basis=basis,
        basis_prev=prev,
        basis_next=nxt,
        d_in=_delbar_matrix(algebra, weight, prev, basis),
        d_out=_delbar_matrix(algebra, weight, basis, nxt),
    )
    logger.debug(
        f"Sector {algebra.weight_text(weight)} ({p},{q}): dim {len(basis)}, "
        f"in-rank {sector.image_dimension}, out-rank {linalg.rank(sector.d_out)}"
    )
    return sector


def cohomology_dimension(algebra: CoframeAlgebra, weight: Weight, p: int, q: int) -> int:
    return build_sector(algebra, weight, p, q).cohomology_dimension


def invariant_h01_dimension(algebra: CoframeAlgebra, weights: Optional[Iterable[Weight]] = None) -> int:
    """dim H^{0,1} of the invariant subcomplex, summed over the given weight sectors (default: weight 0)."""
    weights = [algebra.zero_weight] if weights is None else [tuple(w) for w in weights]
    total = 0
    for w in weights:
        dim = cohomology_dimension(algebra, w, 0, 1)
        logger.info(f"H^(0,1) in sector {algebra.weight_text(w)}: {dim}")
        total += dim
    return total


@dataclass
class SectorReduction:
    """Reduction of the part of a form living in one weight sector."""
    weight: Weight
    bidegree: Tuple[int, int]
    image_rank: int
    complement: List[Tuple[Index, Index]]
    exact_part: WForm
    potential: WForm
    residual: WForm
    conditions: List[GaussPoly]
    labels: List[str]


@dataclass
class ClassResidual:
    """
    Normal form of a ∂̄-closed form modulo ∂̄-exact forms.

    form = exact_part + residual, ∂̄(potential) = exact_part, and the residual
    is orthogonal to the image under the monomial pairing. conditions are
    the residual's coefficients on the complement basis, zero ones dropped;
    normalized scales each to a graded-lex leading coefficient of 1.
    """
    form: WForm
    exact_part: WForm
    potential: WForm
    residual: WForm
    conditions: List[GaussPoly] = field(default_factory=list)
    normalized: List[GaussPoly] = field(default_factory=list)
    labels: List[str] = field(default_factory=list)
    sectors: List[SectorReduction] = field(default_factory=list)

    @property
    def vanishes(self) -> bool:
        return not self.conditions


def reduce_sector(form: WForm, weight: Weight) -> SectorReduction:
    """
    Split the weight-sector part θ of a homogeneous form as Pθ + (I−P)θ with
    P the orthogonal projection onto the ∂̄-image, and solve for a potential.
    """
    algebra = form.algebra
    part = form.component(weight)
    bd = bidegree(part)
    if not isinstance(bd, tuple):
        raise BidegreeError(f"class reduction needs a homogeneous form, got {bd}")
    p, q = bd
    if q < algebra.n and delbar(part):
        raise StructuralError("class reduction needs a delbar-closed form")
    sector = build_sector(algebra, weight, p, q)
    theta = sector.vector(part)
    m = len(sector.basis)
    zero_poly = GaussPoly.zero(algebra.var_table)

    b = sector.d_in
    exact_vec = [zero_poly] * m
    potential = algebra.zero()
    image_rank = 0
    if b.size:
        _, pivots = linalg.rref(b)
        image_rank = len(pivots)
        if pivots:
            b_r = b[:, pivots]
            b_h = linalg.conj_transpose(b_r)
            gram_inv = linalg.inverse(linalg.matmul(b_h, b_r))
            solve = linalg.matmul(gram_inv, b_h)          # x = solve · θ
            x = [sum((theta[j] * solve[i, j] for j in range(m) if solve[i, j]), zero_poly) for i in range(len(pivots))]
            exact_vec = [
                sum((x[s] * b_r[i, s] for s in range(len(pivots)) if b_r[i, s]), zero_poly) for i in range(m)
            ]
            potential = sector.form(x, [sector.basis_prev[c] for c in pivots])

    residual_vec = [t - e for t, e in zip(theta, exact_vec)]
    # the complement is null(B^H); its RREF basis has one vector per free
    # column, so residual coordinates are the residual's entries there
    pivots_h = linalg.rref(linalg.conj_transpose(b))[1] if b.size else []
    free_positions = [i for i in range(m) if i not in pivots_h]
    conditions, labels = [], []
    for pos in free_positions:
        c = residual_vec[pos]
        if c:
            conditions.append(c)
            h, a = sector.basis[pos]
            prefix = "" if not any(weight) else f"[{algebra.weight_text(weight)}] "
            labels.append(f"{prefix}{monomial_text(h, a)}")

    reduction = SectorReduction(
        weight=weight,
        bidegree=(p, q),
        image_rank=image_rank,
        complement=[sector.basis[pos] for pos in free_positions],
        exact_part=sector.form(exact_vec),
        potential=potential,
        residual=sector.form(residual_vec),
        conditions=conditions,
        labels=labels,
    )
    logger.debug(
        f"Sector {algebra.weight_text(weight)}: image rank {image_rank}, "
        f"{len(conditions)} condition(s)"
    )
    return reduction


def sector_order(algebra: CoframeAlgebra, weights: Iterable[Weight]) -> List[Weight]:
    """Weight 0 first, then the others in increasing order."""
    zero = algebra.zero_weight
    return sorted(set(tuple(w) for w in weights), key=lambda w: (w != zero, w))


def assemble(form: WForm, reductions: Sequence[SectorReduction]) -> ClassResidual:
    algebra = form.algebra
    result = ClassResidual(form=form, exact_part=algebra.zero(), potential=algebra.zero(), residual=algebra.zero())
    for r in reductions:
        result.exact_part = result.exact_part + r.exact_part
        result.potential = result.potential + r.potential
        result.residual = result.residual + r.residual
        result.conditions.extend(r.conditions)
        result.labels.extend(r.labels)
        result.sectors.append(r)
    result.normalized = [c.normalized() for c in result.conditions]
    return result


def reduce_class(form: WForm) -> ClassResidual:
    """Reduce a ∂̄-closed homogeneous form sector by sector."""
    reductions = [reduce_sector(form, w) for w in sector_order(form.algebra, form.weights())]
    result = assemble(form, reductions)
    logger.info(f"Class reduction: {len(result.conditions)} condition(s) over {len(reductions)} sector(s)")
    return result


def certify_exact(term: WForm, potential: WForm) -> bool:
    """∂̄(potential) == term exactly."""
    if term and potential and set(term.weights()) != set(potential.weights()):
        raise StructuralError("certificate potential lives in a different weight sector")
    return delbar(potential) == term

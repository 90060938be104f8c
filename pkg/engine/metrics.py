"""
Hermitian Metrics
Logic Layer Component

Invariant Hermitian metrics, their fundamental forms under the two supported
conventions, wedge powers and the balanced test, plus the numeric
ℂ-antilinear Hodge star with ∂̄*, the Dolbeault Laplacian and harmonicity.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from config import config
from engine.calculus import del_, delbar
from engine.forms import CoframeAlgebra, Index, Key, NumWForm, WForm, as_numeric, form_conj, wedge
from engine.scalars import GaussPoly, GaussRat, I
from utils.errors import AssignmentError, NonHermitianError, NotPositiveDefiniteError, StructuralError

logger = logging.getLogger(__name__)

HERMITIAN_STANDARD = "hermitian-standard"
PAPER_LITERAL = "paper-literal"
CONVENTIONS = (HERMITIAN_STANDARD, PAPER_LITERAL)


class HermMetric:
    """
    Invariant Hermitian metric given by an n×n conjugate-symmetric matrix A of
    polynomials, with the convention used to build its fundamental form.

    hermitian-standard reads ω = (i/2) Σ_{j,k} A_jk η^j ∧ η̄^k. paper-literal
    reads the entries as α_jj = A_jj and α_jk = i·A_jk (j < k) and emits
    ω = (i/2) Σ α_jj η^{jj̄} + ½ Σ_{j<k} (α_jk − ᾱ_jk) η^{jk̄}.
    """

    def __init__(self, matrix: Sequence[Sequence[GaussPoly]], convention: str = HERMITIAN_STANDARD, name: str = "g"):
        if convention not in CONVENTIONS:
            raise StructuralError(f"unknown metric convention {convention!r}")
        n = len(matrix)
        if n == 0 or any(len(row) != n for row in matrix):
            raise StructuralError("metric matrix must be square")
        self.n = n
        self.name = name
        self.convention = convention
        self.matrix: Tuple[Tuple[GaussPoly, ...], ...] = tuple(tuple(row) for row in matrix)
        self.var_table = self.matrix[0][0].table
        for j in range(n):
            for k in range(j, n):
                if self.matrix[k][j] != self.matrix[j][k].conjugate():
                    raise NonHermitianError(
                        f"metric {name}: entry ({k + 1},{j + 1}) is not the conjugate of ({j + 1},{k + 1})"
                    )

    def with_convention(self, convention: str) -> "HermMetric":
        return HermMetric(self.matrix, convention, self.name)

    def entry(self, j: int, k: int) -> GaussPoly:
        return self.matrix[j - 1][k - 1]

    def alpha(self, j: int, k: int) -> GaussPoly:
        """The α_jk symbol read off under the paper-literal convention."""
        a = self.entry(j, k)
        return a if j == k else a * I

    def numeric(self, assign: Mapping[str, complex]) -> np.ndarray:
        values = self.var_table.complete_assignment(assign)
        out = np.zeros((self.n, self.n), dtype=complex)
        for j in range(self.n):
            for k in range(self.n):
                out[j, k] = self.matrix[j][k].evaluate(values, complete=False)
        return out

    def __repr__(self) -> str:
        return f"HermMetric({self.name}, n={self.n}, {self.convention})"


def identity_assignment(g: HermMetric, fixed: Optional[Mapping[str, complex]] = None) -> Dict[str, complex]:
    """
    Values for the metric's variables making its matrix the identity: a
    diagonal entry that is a bare variable gets 1, every other metric
    variable gets 0. Variables in ``fixed`` keep their values.

    Raises:
        AssignmentError: the identity is not reached this way
    """
    fixed = dict(fixed or {})
    table = g.var_table
    names = {table.conj_name(v) if v.startswith("~") else v for row in g.matrix for e in row for v in e.variables()}
    out: Dict[str, complex] = {v: 0j for v in names if v not in fixed}
    for j in range(1, g.n + 1):
        entry = g.entry(j, j)
        for v in entry.variables():
            if v in out and entry == GaussPoly.var(table, v):
                out[v] = 1 + 0j
    if not np.allclose(g.numeric({**out, **fixed}), np.eye(g.n)):
        raise AssignmentError(f"metric {g.name} cannot be set to the identity by assigning its variables")
    return out


def omega_from_metric(algebra: CoframeAlgebra, g: HermMetric) -> WForm:
    """Fundamental (1,1)-form of g over the algebra, under g's convention."""
    if g.n != algebra.n:
        raise StructuralError(f"metric is {g.n}x{g.n} but the algebra has dimension {algebra.n}")
    half_i = GaussRat(0, Fraction(1, 2))
    half = GaussRat(Fraction(1, 2))
    omega = algebra.zero()
    if g.convention == HERMITIAN_STANDARD:
        for j in range(1, g.n + 1):
            for k in range(1, g.n + 1):
                entry = g.entry(j, k)
                if entry:
                    omega = omega + algebra.mono((j,), (k,), coeff=entry * half_i)
        return omega
    for j in range(1, g.n + 1):
        omega = omega + algebra.mono((j,), (j,), coeff=g.alpha(j, j) * half_i)
    for j in range(1, g.n + 1):
        for k in range(j + 1, g.n + 1):
            a = g.alpha(j, k)
            coeff = (a - a.conjugate()) * half
            if coeff:
                omega = omega + algebra.mono((j,), (k,), coeff=coeff)
    return omega


def wedge_power(omega: WForm, k: int) -> WForm:
    """ω^k, the plain k-fold wedge (no factorial normalisation)."""
    n = omega.algebra.n
    if not 1 <= k <= n:
        raise StructuralError(f"wedge power must lie in 1..{n}, got {k}")
    result = omega
    for _ in range(k - 1):
        result = wedge(result, omega)
    return result


def realness_defect(omega: WForm) -> WForm:
    """conj(ω) − ω; zero exactly when ω is a real form."""
    return form_conj(omega) - omega


@dataclass
class BalancedReport:
    """Outcome of balanced_check."""
    balanced: bool
    residual: WForm          # ∂̄ω^{n−1}
    del_residual: WForm      # ∂ω^{n−1}
    equivalent: bool         # ∂̄ω^{n−1} = 0 ⟺ ∂ω^{n−1} = 0
    realness_defect: WForm


def balanced_check(algebra: CoframeAlgebra, omega: WForm) -> BalancedReport:
    """∂̄(ω^{n−1}) with the ∂ counterpart and the realness of ω."""
    power = wedge_power(omega, algebra.n - 1) if algebra.n > 1 else algebra.one()
    residual = delbar(power)
    del_residual = del_(power)
    defect = realness_defect(omega)
    report = BalancedReport(
        balanced=residual.is_zero(),
        residual=residual,
        del_residual=del_residual,
        equivalent=residual.is_zero() == del_residual.is_zero(),
        realness_defect=defect,
    )
    if defect:
        logger.info("Fundamental form is not real; the delbar/del equivalence is not guaranteed")
    logger.info(f"Balanced check on {algebra.name or '(anonymous)'}: {'balanced' if report.balanced else 'not balanced'}")
    return report


# numeric Hodge theory -------------------------------------------------------

def posdef_check(matrix: np.ndarray, tol: Optional[float] = None) -> bool:
    """
    Positive definiteness of a numeric Hermitian matrix via Cholesky.

    Raises:
        NonHermitianError: the matrix differs from its conjugate transpose by more than tol
    """
    tol = config.numeric.hermitian_tol if tol is None else tol
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonHermitianError("metric sample must be a square matrix")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if np.max(np.abs(a - a.conj().T), initial=0.0) > tol * scale:
        raise NonHermitianError("metric sample is not Hermitian")
    try:
        np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return False
    return True


def _det(sub: np.ndarray) -> complex:
    return 1.0 + 0j if sub.size == 0 else complex(np.linalg.det(sub))


class HodgeStar:
    """
    ℂ-antilinear Hodge star for a numeric positive-definite metric matrix A.

    A = L L^H gives a unitary coframe θ = L^T η with ω = (i/2) Σ θ^m ∧ θ̄^m,
    in which ∗̄(θ^I θ̄^J) = c_IJ θ^{I^c} θ̄^{J^c} with c chosen so that
    α ∧ ∗̄β = ⟨α, β⟩ vol and vol = ω^n / n!.
    """

    def __init__(self, algebra: CoframeAlgebra, matrix: np.ndarray):
        a = np.asarray(matrix, dtype=complex)
        if a.shape != (algebra.n, algebra.n):
            raise StructuralError("metric sample does not match the algebra dimension")
        if not posdef_check(a):
            raise NotPositiveDefiniteError("metric sample is not positive definite")
        self.algebra = algebra
        self.n = algebra.n
        self.matrix = a
        lower = np.linalg.cholesky(a)
        self.to_theta = lower.T                      # θ = M η
        self.to_eta = np.linalg.inv(self.to_theta)   # η = P θ
        self._minors: Dict[Tuple[str, int], Dict[Tuple[Index, Index], complex]] = {}
        n = self.n
        tau = -1 if (n * (n - 1) // 2) % 2 else 1
        self.vol_theta = (0.5j) ** n * tau
        self.vol_eta = self.vol_theta * complex(np.linalg.det(a))

    def _minor_table(self, which: str, p: int) -> Dict[Tuple[Index, Index], complex]:
        key = (which, p)
        if key not in self._minors:
            mat = {
                "eta": self.to_eta,
                "eta_bar": self.to_eta.conj(),
                "theta": self.to_theta,
                "theta_bar": self.to_theta.conj(),
            }[which]
            subsets = list(itertools.combinations(range(1, self.n + 1), p))
            table = {}
            for rows in subsets:
                for cols in subsets:
                    value = _det(mat[np.ix_([r - 1 for r in rows], [c - 1 for c in cols])])
                    if abs(value) > 1e-15:
                        table[(rows, cols)] = value
            self._minors[key] = table
        return self._minors[key]

    def _change_basis(self, terms: Mapping[Key, complex], holo: str, anti: str) -> Dict[Key, complex]:
        out: Dict[Key, complex] = {}
        for (w, h, a), c in terms.items():
            h_table = self._minor_table(holo, len(h))
            a_table = self._minor_table(anti, len(a))
            h_images = [(cols, v) for (rows, cols), v in h_table.items() if rows == h]
            a_images = [(cols, v) for (rows, cols), v in a_table.items() if rows == a]
            for hi, hv in h_images:
                for ai, av in a_images:
                    key = (w, hi, ai)
                    out[key] = out.get(key, 0j) + c * hv * av
        return out

    def _complement_sign(self, holo: Index, anti: Index) -> Tuple[Index, Index, int]:
        full = tuple(range(1, self.n + 1))
        hc = tuple(i for i in full if i not in holo)
        ac = tuple(i for i in full if i not in anti)
        # θ^I θ̄^J ∧ θ^{I^c} θ̄^{J^c} reordered to θ^{1..n} θ̄^{1..n}
        seq = list(holo) + [self.n + j for j in anti] + list(hc) + [self.n + j for j in ac]
        inversions = sum(1 for x in range(len(seq)) for y in range(x + 1, len(seq)) if seq[x] > seq[y])
        return hc, ac, -1 if inversions % 2 else 1

    def star(self, alpha: WForm) -> NumWForm:
        """∗̄α; antilinear, (p,q) ↦ (n−p, n−q), weight w ↦ −w."""
        alpha = as_numeric(alpha)
        theta_terms = self._change_basis(alpha.terms, "eta", "eta_bar")
        starred: Dict[Key, complex] = {}
        for (w, h, a), c in theta_terms.items():
            hc, ac, sign = self._complement_sign(h, a)
            factor = 2 ** (len(h) + len(a)) * self.vol_theta / sign
            key = (tuple(-x for x in w), hc, ac)
            starred[key] = starred.get(key, 0j) + c.conjugate() * factor
        out = NumWForm.zero_over(self.algebra)
        out.terms = {k: v for k, v in self._change_basis(starred, "theta", "theta_bar").items() if v}
        return out

    def inner(self, alpha: WForm, beta: WForm) -> complex:
        """⟨α, β⟩: weight-0 top coefficient of α ∧ ∗̄β over the volume coefficient."""
        top = wedge(as_numeric(alpha), self.star(beta))
        full = tuple(range(1, self.n + 1))
        value = top.terms.get((self.algebra.zero_weight, full, full), 0j)
        return value / self.vol_eta

    def norm(self, alpha: WForm) -> float:
        return math.sqrt(max(self.inner(alpha, alpha).real, 0.0))


def hodge_star(alpha: WForm, matrix: np.ndarray) -> NumWForm:
    return HodgeStar(alpha.algebra, matrix).star(alpha)


def delbar_adjoint(alpha: WForm, matrix: np.ndarray, star: Optional[HodgeStar] = None) -> NumWForm:
    """∂̄* = −∗̄∂̄∗̄."""
    star = star or HodgeStar(alpha.algebra, matrix)
    return -star.star(delbar(star.star(alpha)))


def dolbeault_laplacian(alpha: WForm, matrix: np.ndarray, star: Optional[HodgeStar] = None) -> NumWForm:
    """Δ = ∂̄*∂̄ + ∂̄∂̄*."""
    star = star or HodgeStar(alpha.algebra, matrix)
    alpha = as_numeric(alpha)
    return delbar_adjoint(delbar(alpha), matrix, star) + delbar(delbar_adjoint(alpha, matrix, star))


@dataclass
class HarmonicReport:
    """Per-sample outcome of harmonic_check."""
    harmonic: bool
    delbar_max: float
    adjoint_max: float
    tolerance: float


def harmonic_check(alpha: WForm, matrix: np.ndarray, tol: Optional[float] = None) -> HarmonicReport:
    """∂̄α = 0 and ∂̄*α = 0 coefficientwise within tol."""
    tol = config.numeric.harmonic_tol if tol is None else tol
    alpha = as_numeric(alpha)
    db = delbar(alpha).max_abs()
    adj = delbar_adjoint(alpha, matrix).max_abs()
    return HarmonicReport(harmonic=db <= tol and adj <= tol, delbar_max=db, adjoint_max=adj, tolerance=tol)

"""
Form Algebra
Logic Layer Component

Character-weighted invariant complex differential forms over a declared
coframe η¹…ηⁿ. A monomial is e^w · η^H ∧ η̄^A with H and A strictly
increasing index tuples (1-based) and w an integer exponent per declared
character.
"""

import itertools
import logging
from dataclasses import dataclass
from math import comb
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from engine.scalars import GaussPoly, GaussRat, VarTable
from utils.errors import AlgebraCheckError, StructuralError

logger = logging.getLogger(__name__)

Weight = Tuple[int, ...]
Index = Tuple[int, ...]
Key = Tuple[Weight, Index, Index]
Bidegree = Union[Tuple[int, int], str]

ANY = "any"      # bidegree of the zero form
MIXED = "mixed"  # several bidegrees present


def sort_sign(indices: Sequence[int]) -> Tuple[int, Index]:
    """
    Sort an index sequence, returning (sign of the permutation, sorted tuple).
    A repeated index gives sign 0.
    """
    seq = list(indices)
    if len(set(seq)) != len(seq):
        return 0, ()
    sign = 1
    # insertion sort keeps track of transpositions
    for i in range(1, len(seq)):
        j = i
        while j > 0 and seq[j - 1] > seq[j]:
            seq[j - 1], seq[j] = seq[j], seq[j - 1]
            sign = -sign
            j -= 1
    return sign, tuple(seq)


@dataclass(frozen=True)
class Character:
    """
    Multiplicative character declared through its logarithmic differential.

    dlog10[i-1] is the coefficient of η^i, dlog01[i-1] the coefficient of η̄^i.
    """
    name: str
    dlog10: Tuple[GaussRat, ...]
    dlog01: Tuple[GaussRat, ...]

    def is_unitary(self) -> bool:
        """conj(dlog10) = −dlog01, so the conjugate of e^w is e^{−w}."""
        return all(a.conjugate() == -b for a, b in zip(self.dlog10, self.dlog01))


class CoframeAlgebra:
    """
    Complex dimension n, the structure 2-forms dη^k and the character table.

    Args:
        n: Complex dimension
        structure: For k = 1..n, dη^k as a map (holo, antiholo) -> GaussRat
        characters: Declared characters, in weight-vector order
        var_table: Variables that coefficients of forms over this algebra use
        name: Label for reports
    """

    def __init__(
        self,
        n: int,
        structure: Sequence[Mapping[Tuple[Index, Index], GaussRat]],
        characters: Sequence[Character],
        var_table: VarTable,
        name: str = "",
    ):
        if n < 1:
            raise StructuralError("complex dimension must be positive")
        if len(structure) != n:
            raise StructuralError(f"expected {n} structure equations, got {len(structure)}")
        self.n = n
        self.name = name
        self.var_table = var_table
        self.characters: Tuple[Character, ...] = tuple(characters)
        for ch in self.characters:
            if len(ch.dlog10) != n or len(ch.dlog01) != n:
                raise StructuralError(f"character {ch.name!r} has the wrong number of dlog entries")

        self._d_eta: List[Dict[Key, GaussRat]] = []
        for k, raw in enumerate(structure, start=1):
            terms: Dict[Key, GaussRat] = {}
            for (holo, anti), c in raw.items():
                c = GaussRat.coerce(c)
                if not c:
                    continue
                if len(holo) + len(anti) != 2:
                    raise AlgebraCheckError(f"d e{k} is not a 2-form")
                if len(holo) == 0:
                    raise AlgebraCheckError(f"d e{k} has a (0,2) component; the structure is not integrable")
                s1, h = sort_sign(holo)
                s2, a = sort_sign(anti)
                if s1 * s2 == 0:
                    continue
                key = (self.zero_weight, h, a)
                total = terms.get(key, GaussRat(0)) + c * (s1 * s2)
                if total:
                    terms[key] = total
                else:
                    terms.pop(key, None)
            self._d_eta.append(terms)
        self._d_etabar = [self._conj_terms(t) for t in self._d_eta]
        # d of bare monomials, filled lazily by engine.calculus
        self.d_cache: Dict[Tuple[Index, Index], Dict[Key, GaussRat]] = {}
        logger.debug(f"Built coframe algebra {name or '(anonymous)'} n={n} characters={len(self.characters)}")

    # weights ----------------------------------------------------------------

    @property
    def zero_weight(self) -> Weight:
        return (0,) * len(self.characters)

    def character_index(self, name: str) -> int:
        for k, ch in enumerate(self.characters):
            if ch.name == name:
                return k
        raise StructuralError(f"unknown character {name!r}")

    def unit_weight(self, name: str, power: int = 1) -> Weight:
        w = [0] * len(self.characters)
        w[self.character_index(name)] = power
        return tuple(w)

    def weight_text(self, weight: Weight) -> str:
        parts = []
        for ch, power in zip(self.characters, weight):
            if power == 0:
                continue
            mag = abs(power)
            body = ch.name if mag == 1 else f"{mag}*{ch.name}"
            if power < 0:
                parts.append(f"-{body}")
            else:
                parts.append(f"+{body}" if parts else body)
        return "".join(parts) or "0"

    def dlog10(self, weight: Weight) -> List[GaussRat]:
        out = [GaussRat(0)] * self.n
        for ch, power in zip(self.characters, weight):
            if power:
                out = [o + c * power for o, c in zip(out, ch.dlog10)]
        return out

    def dlog01(self, weight: Weight) -> List[GaussRat]:
        out = [GaussRat(0)] * self.n
        for ch, power in zip(self.characters, weight):
            if power:
                out = [o + c * power for o, c in zip(out, ch.dlog01)]
        return out

    # structure equations ----------------------------------------------------

    @staticmethod
    def _conj_terms(terms: Mapping[Key, GaussRat]) -> Dict[Key, GaussRat]:
        out = {}
        for (w, h, a), c in terms.items():
            sign = -1 if (len(h) * len(a)) % 2 else 1
            out[(tuple(-x for x in w), a, h)] = c.conjugate() * sign
        return out

    def d_eta_terms(self, k: int) -> Dict[Key, GaussRat]:
        return self._d_eta[k - 1]

    def d_etabar_terms(self, k: int) -> Dict[Key, GaussRat]:
        return self._d_etabar[k - 1]

    def d_eta(self, k: int) -> "WForm":
        return WForm(self, {key: self.poly(c) for key, c in self._d_eta[k - 1].items()})

    def d_etabar(self, k: int) -> "WForm":
        return WForm(self, {key: self.poly(c) for key, c in self._d_etabar[k - 1].items()})

    def is_abelian(self) -> bool:
        return not any(self._d_eta)

    # constructors -----------------------------------------------------------

    def poly(self, value) -> GaussPoly:
        if isinstance(value, GaussPoly):
            return value
        return GaussPoly.const(self.var_table, value)

    def var(self, name: str) -> GaussPoly:
        return GaussPoly.var(self.var_table, name)

    def zero(self) -> "WForm":
        return WForm(self, {})

    def one(self) -> "WForm":
        return self.mono((), ())

    def mono(self, holo: Iterable[int] = (), anti: Iterable[int] = (), weight: Optional[Weight] = None, coeff=1) -> "WForm":
        """e^weight · coeff · η^holo ∧ η̄^anti, reordered with sign."""
        weight = self.zero_weight if weight is None else tuple(weight)
        if len(weight) != len(self.characters):
            raise StructuralError("weight vector length does not match the character table")
        holo, anti = tuple(holo), tuple(anti)
        for i in holo + anti:
            if not 1 <= i <= self.n:
                raise StructuralError(f"coframe index {i} out of range 1..{self.n}")
        s1, h = sort_sign(holo)
        s2, a = sort_sign(anti)
        if isinstance(coeff, (complex, float)):
            out = NumWForm.zero_over(self)
            if s1 * s2 and coeff:
                out.terms[(weight, h, a)] = complex(coeff) * (s1 * s2)
            return out
        if s1 * s2 == 0:
            return self.zero()
        return WForm(self, {(weight, h, a): self.poly(coeff) * (s1 * s2)})

    def eta(self, i: int) -> "WForm":
        return self.mono((i,), ())

    def etabar(self, i: int) -> "WForm":
        return self.mono((), (i,))

    def basis(self, p: int, q: int) -> List[Tuple[Index, Index]]:
        """(p,q) monomials, graded-lex on the holo then antiholo index sets."""
        rng = range(1, self.n + 1)
        return [(h, a) for h in itertools.combinations(rng, p) for a in itertools.combinations(rng, q)]

    def basis_dimension(self, p: int, q: int) -> int:
        return comb(self.n, p) * comb(self.n, q)

    def __repr__(self) -> str:
        return f"CoframeAlgebra({self.name or 'anonymous'}, n={self.n})"


class WForm:
    """
    Character-weighted invariant form.

    Coefficients are GaussPoly for exact work and Python complex in the
    numeric subclass NumWForm. No zero coefficients are stored.
    """

    __slots__ = ("algebra", "terms")

    def __init__(self, algebra: CoframeAlgebra, terms: Optional[Mapping[Key, object]] = None):
        self.algebra = algebra
        self.terms: Dict[Key, object] = {k: c for k, c in (terms or {}).items() if c}

    def _new(self, terms: Dict[Key, object]) -> "WForm":
        out = type(self).__new__(type(self))
        out.algebra = self.algebra
        out.terms = {k: c for k, c in terms.items() if c}
        return out

    def _check(self, other: "WForm"):
        if other.algebra is not self.algebra:
            raise StructuralError("forms live over different algebras")

    # linear structure -------------------------------------------------------

    def __add__(self, other: "WForm") -> "WForm":
        if not isinstance(other, WForm):
            return NotImplemented
        self._check(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out[k] + c if k in out else c
        return self._new(out)

    def __neg__(self) -> "WForm":
        return self._new({k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "WForm") -> "WForm":
        if not isinstance(other, WForm):
            return NotImplemented
        return self + (-other)

    def scale(self, factor) -> "WForm":
        """Multiply every coefficient by a scalar (coefficient on the left)."""
        return self._new({k: c * factor for k, c in self.terms.items()})

    def __mul__(self, factor) -> "WForm":
        if isinstance(factor, WForm):
            return NotImplemented
        return self.scale(factor)

    __rmul__ = __mul__

    def __xor__(self, other: "WForm") -> "WForm":
        return wedge(self, other)

    def map_coefficients(self, fn: Callable[[object], object]) -> "WForm":
        return self._new({k: fn(c) for k, c in self.terms.items()})

    # inspection -------------------------------------------------------------

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, WForm):
            return NotImplemented
        return self.algebra is other.algebra and (self - other).is_zero()

    __hash__ = None

    def weights(self) -> List[Weight]:
        return sorted({w for w, _, _ in self.terms})

    def component(self, weight: Weight) -> "WForm":
        """The part of the form in one weight sector."""
        weight = tuple(weight)
        return self._new({k: c for k, c in self.terms.items() if k[0] == weight})

    def part(self, p: int, q: int) -> "WForm":
        """The bidegree-(p,q) part."""
        return self._new({k: c for k, c in self.terms.items() if len(k[1]) == p and len(k[2]) == q})

    def bidegrees(self) -> List[Tuple[int, int]]:
        return sorted({(len(h), len(a)) for _, h, a in self.terms})

    def coefficient(self, holo: Index, anti: Index, weight: Optional[Weight] = None):
        weight = self.algebra.zero_weight if weight is None else tuple(weight)
        return self.terms.get((weight, tuple(holo), tuple(anti)), 0)

    def sorted_keys(self) -> List[Key]:
        return sorted(self.terms, key=lambda k: (len(k[1]) + len(k[2]), k[0], len(k[1]), k[1], k[2]))

    def __str__(self) -> str:
        return form_text(self)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({form_text(self)})"


class NumWForm(WForm):
    """WForm with complex-double coefficients."""

    __slots__ = ()

    @classmethod
    def from_exact(cls, form: WForm, assign: Mapping[str, complex]) -> "NumWForm":
        values = form.algebra.var_table.complete_assignment(assign)
        out = cls.__new__(cls)
        out.algebra = form.algebra
        out.terms = {}
        for k, c in form.terms.items():
            v = c.evaluate(values, complete=False) if isinstance(c, GaussPoly) else complex(c)
            if v:
                out.terms[k] = v
        return out

    @classmethod
    def zero_over(cls, algebra: CoframeAlgebra) -> "NumWForm":
        out = cls.__new__(cls)
        out.algebra = algebra
        out.terms = {}
        return out

    def max_abs(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def close_to(self, other: WForm, tol: float) -> bool:
        return (self - other).max_abs() <= tol


def as_numeric(form: WForm, assign: Optional[Mapping[str, complex]] = None) -> NumWForm:
    """Evaluate an exact form at an assignment; numeric forms pass through."""
    if isinstance(form, NumWForm):
        return form
    return NumWForm.from_exact(form, assign or {})


def wedge(alpha: WForm, beta: WForm) -> WForm:
    """
    Exterior product in canonical order e^w η^H η̄^A.

    Moving η̄^{A1} past η^{H2} costs (−1)^{|A1||H2|}; the holo and antiholo
    index lists are then sorted with their permutation signs.
    """
    alpha._check(beta)
    return alpha._new(wedge_terms(alpha.terms, beta.terms))


def wedge_terms(left: Mapping[Key, object], right: Mapping[Key, object]) -> Dict[Key, object]:
    """Term-level wedge; cancelled entries may remain as zero coefficients."""
    out: Dict[Key, object] = {}
    for (w1, h1, a1), c1 in left.items():
        for (w2, h2, a2), c2 in right.items():
            s1, h = sort_sign(h1 + h2)
            if not s1:
                continue
            s2, a = sort_sign(a1 + a2)
            if not s2:
                continue
            sign = s1 * s2 * (-1 if (len(a1) * len(h2)) % 2 else 1)
            key = (tuple(x + y for x, y in zip(w1, w2)), h, a)
            c = c1 * c2
            if sign < 0:
                c = -c
            out[key] = out[key] + c if key in out else c
    return out


def form_conj(alpha: WForm) -> WForm:
    """Complex conjugation: swap η ↔ η̄ with reorder sign, negate weights, conjugate coefficients."""
    out = {}
    for (w, h, a), c in alpha.terms.items():
        c = c.conjugate()
        if (len(h) * len(a)) % 2:
            c = -c
        out[(tuple(-x for x in w), a, h)] = c
    return alpha._new(out)


def bidegree(alpha: WForm) -> Bidegree:
    """(p, q) for a homogeneous form, MIXED when several bidegrees occur, ANY for zero."""
    degs = alpha.bidegrees()
    if not degs:
        return ANY
    if len(degs) > 1:
        return MIXED
    return degs[0]


def degree(alpha: WForm) -> Optional[int]:
    degs = {p + q for p, q in alpha.bidegrees()}
    if len(degs) == 1:
        return degs.pop()
    return None


def monomial_text(holo: Index, anti: Index) -> str:
    parts = [f"e{i}" for i in holo] + [f"~e{i}" for i in anti]
    return "^".join(parts) if parts else "1"


def coefficient_text(c) -> str:
    if isinstance(c, complex):
        return f"{c.real:.15g}{c.imag:+.15g}i"
    return str(c)


def form_text(alpha: WForm, dsl: bool = False) -> str:
    """
    Canonical text: terms ``(coeff) * [w] e1^~e2`` joined by ``+``.
    The coefficient is omitted when it is 1 and the weight when it is zero.
    With ``dsl`` the weight is multiplied in (``[w] * e1``) so the model
    parser reads the text back.
    """
    if alpha.is_zero():
        return "0"
    out = []
    zero_w = alpha.algebra.zero_weight
    for key in alpha.sorted_keys():
        w, h, a = key
        c = alpha.terms[key]
        pieces = []
        if not (c == 1):
            pieces.append(f"({coefficient_text(c)})")
        mono = monomial_text(h, a)
        if w != zero_w:
            prefix = f"[{alpha.algebra.weight_text(w)}]"
            if mono == "1":
                pieces.append(prefix)
            elif dsl:
                pieces.extend([prefix, mono])
            else:
                pieces.append(f"{prefix} {mono}")
        elif mono != "1" or not pieces:
            pieces.append(mono)
        out.append(" * ".join(pieces))
    return " + ".join(out)

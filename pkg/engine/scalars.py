"""
Exact Scalars
Logic Layer Component

Gaussian rationals and sparse multivariate polynomials over them, with a
conjugation involution on the variables. Every coefficient the engine
manipulates symbolically (metric entries, deformation directions, the curve
parameter t) lives in a GaussPoly.
"""

import logging
from fractions import Fraction
from numbers import Rational
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from utils.errors import AssignmentError, StructuralError

logger = logging.getLogger(__name__)

Exponent = Tuple[int, ...]
RationalLike = Union[int, Fraction]


class GaussRat:
    """
    Exact Gaussian rational re + i·im.

    Fractions keep denominators positive and reduced, so every instance is
    canonical after each operation.
    """

    __slots__ = ("re", "im")

    def __init__(self, re: RationalLike = 0, im: RationalLike = 0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def coerce(cls, value) -> "GaussRat":
        if isinstance(value, GaussRat):
            return value
        if isinstance(value, Rational):
            return cls(Fraction(value), 0)
        raise TypeError(f"cannot use {type(value).__name__} as an exact Gaussian rational")

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (complex, float)):
            return complex(self) + other
        try:
            o = GaussRat.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussRat(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self) -> "GaussRat":
        return GaussRat(-self.re, -self.im)

    def __sub__(self, other):
        if isinstance(other, (complex, float)):
            return complex(self) - other
        try:
            o = GaussRat.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussRat(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        if isinstance(other, (complex, float)):
            return other - complex(self)
        try:
            o = GaussRat.coerce(other)
        except TypeError:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        if isinstance(other, (complex, float)):
            return complex(self) * other
        try:
            o = GaussRat.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussRat(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (complex, float)):
            return complex(self) / other
        try:
            o = GaussRat.coerce(other)
        except TypeError:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        if isinstance(other, (complex, float)):
            return other / complex(self)
        try:
            o = GaussRat.coerce(other)
        except TypeError:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int) -> "GaussRat":
        if k < 0:
            return self.inverse() ** (-k)
        result = GaussRat(1)
        for _ in range(k):
            result = result * self
        return result

    def inverse(self) -> "GaussRat":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by the zero Gaussian rational")
        return GaussRat(self.re / n, -self.im / n)

    def conjugate(self) -> "GaussRat":
        return GaussRat(self.re, -self.im)

    def norm(self) -> Fraction:
        """|x|² = x·conj(x), always real."""
        return self.re * self.re + self.im * self.im

    @property
    def is_real(self) -> bool:
        return self.im == 0

    # comparisons / conversions ------------------------------------------

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __eq__(self, other) -> bool:
        if isinstance(other, GaussRat):
            return self.re == other.re and self.im == other.im
        if isinstance(other, Rational):
            return self.im == 0 and self.re == other
        if isinstance(other, complex):
            return complex(self) == other
        return NotImplemented

    def __hash__(self) -> int:
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __repr__(self) -> str:
        return f"GaussRat({self})"

    def __str__(self) -> str:
        if self.im == 0:
            return _frac_text(self.re)
        if self.re == 0:
            return _imag_text(self.im)
        sign = "-" if self.im < 0 else "+"
        return f"({_frac_text(self.re)}{sign}{_imag_text(abs(self.im))})"


def _frac_text(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _imag_text(q: Fraction) -> str:
    if q == 1:
        return "i"
    if q == -1:
        return "-i"
    return f"{_frac_text(q)}*i"


ZERO = GaussRat(0)
ONE = GaussRat(1)
I = GaussRat(0, 1)
HALF = GaussRat(Fraction(1, 2))


class VarTable:
    """
    Ordered variable names plus the conjugation involution on their indices.

    A self-conjugate variable is declared real. The conjugate partner of a
    complex variable ``x`` is named ``~x``.
    """

    def __init__(self, names: Sequence[str], conj: Sequence[int]):
        if len(names) != len(conj):
            raise StructuralError("every variable needs a conjugation partner")
        if len(set(names)) != len(names):
            raise StructuralError("duplicate variable names in VarTable")
        for k, j in enumerate(conj):
            if not 0 <= j < len(names) or conj[j] != k:
                raise StructuralError(f"conjugation is not an involution at {names[k]!r}")
        self.names: Tuple[str, ...] = tuple(names)
        self.conj: Tuple[int, ...] = tuple(conj)
        self._index = {name: k for k, name in enumerate(self.names)}

    @classmethod
    def from_declarations(cls, declarations: Iterable[Tuple[str, bool]]) -> "VarTable":
        """
        Build a table from ``(name, is_real)`` pairs; complex names get a
        ``~name`` partner placed right after them.
        """
        names: List[str] = []
        conj: List[int] = []
        for name, is_real in declarations:
            k = len(names)
            if is_real:
                names.append(name)
                conj.append(k)
            else:
                names.extend([name, f"~{name}"])
                conj.extend([k + 1, k])
        return cls(names, conj)

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, VarTable) and self.names == other.names and self.conj == other.conj

    def __hash__(self) -> int:
        return hash((self.names, self.conj))

    def __repr__(self) -> str:
        return f"VarTable({', '.join(self.names)})"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise StructuralError(f"unknown variable {name!r}") from None

    def is_real(self, name: str) -> bool:
        k = self.index(name)
        return self.conj[k] == k

    def conj_name(self, name: str) -> str:
        return self.names[self.conj[self.index(name)]]

    def base_names(self) -> List[str]:
        """Declared names, one per conjugate pair (the non-tilde member)."""
        return [n for n in self.names if not n.startswith("~")]

    def complete_assignment(self, assign: Mapping[str, complex]) -> Dict[str, complex]:
        """
        Fill in conjugate partners and validate the pairing.

        Raises:
            AssignmentError: unknown name, a real variable given a complex value,
                or both members of a pair given inconsistent values
        """
        full: Dict[str, complex] = {}
        for name, value in assign.items():
            if name not in self._index:
                raise AssignmentError(f"unknown variable {name!r}")
            full[name] = complex(value)
        for name, value in list(full.items()):
            partner = self.conj_name(name)
            if partner == name:
                if abs(value.imag) > 1e-12 * max(1.0, abs(value)):
                    raise AssignmentError(f"real variable {name!r} assigned complex value {value}")
                full[name] = complex(value.real, 0.0)
                continue
            expected = value.conjugate()
            if partner in full and abs(full[partner] - expected) > 1e-12 * max(1.0, abs(value)):
                raise AssignmentError(f"inconsistent conjugate pair {name!r}/{partner!r}")
            full[partner] = expected
        return full


class GaussPoly:
    """
    Sparse polynomial with GaussRat coefficients over a VarTable.

    Terms are a map from dense exponent tuples to nonzero coefficients.
    Values are immutable after construction.
    """

    __slots__ = ("table", "terms")

    def __init__(self, table: VarTable, terms: Optional[Mapping[Exponent, GaussRat]] = None):
        self.table = table
        clean: Dict[Exponent, GaussRat] = {}
        if terms:
            width = len(table)
            for exp, coeff in terms.items():
                if len(exp) != width:
                    raise StructuralError("exponent vector does not match the VarTable")
                c = GaussRat.coerce(coeff)
                if c:
                    clean[tuple(exp)] = c
        self.terms = clean

    # constructors ---------------------------------------------------------

    @classmethod
    def zero(cls, table: VarTable) -> "GaussPoly":
        return cls(table)

    @classmethod
    def const(cls, table: VarTable, value) -> "GaussPoly":
        return cls(table, {(0,) * len(table): GaussRat.coerce(value)})

    @classmethod
    def var(cls, table: VarTable, name: str) -> "GaussPoly":
        exp = [0] * len(table)
        exp[table.index(name)] = 1
        return cls(table, {tuple(exp): ONE})

    # helpers --------------------------------------------------------------

    def _lift(self, other) -> "GaussPoly":
        if isinstance(other, GaussPoly):
            if other.table is not self.table and other.table != self.table:
                raise StructuralError("polynomials over different VarTables")
            return other
        return GaussPoly.const(self.table, GaussRat.coerce(other))

    @classmethod
    def _raw(cls, table: VarTable, terms: Dict[Exponent, GaussRat]) -> "GaussPoly":
        p = cls.__new__(cls)
        p.table = table
        p.terms = terms
        return p

    # ring operations ------------------------------------------------------

    def __add__(self, other):
        try:
            o = self._lift(other)
        except TypeError:
            return NotImplemented
        out = dict(self.terms)
        for exp, c in o.terms.items():
            s = out.get(exp, ZERO) + c
            if s:
                out[exp] = s
            else:
                out.pop(exp, None)
        return GaussPoly._raw(self.table, out)

    __radd__ = __add__

    def __neg__(self) -> "GaussPoly":
        return GaussPoly._raw(self.table, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        try:
            o = self._lift(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        try:
            o = self._lift(other)
        except TypeError:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        if isinstance(other, GaussPoly):
            o = self._lift(other)
        else:
            try:
                c = GaussRat.coerce(other)
            except TypeError:
                return NotImplemented
            if not c:
                return GaussPoly.zero(self.table)
            return GaussPoly._raw(self.table, {e: v * c for e, v in self.terms.items()})
        out: Dict[Exponent, GaussRat] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, ZERO) + c1 * c2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return GaussPoly._raw(self.table, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            c = GaussRat.coerce(other)
        except TypeError:
            return NotImplemented
        return self * c.inverse()

    def __pow__(self, k: int) -> "GaussPoly":
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        result = GaussPoly.const(self.table, ONE)
        for _ in range(k):
            result = result * self
        return result

    def conjugate(self) -> "GaussPoly":
        """Swap variables along the pairing and conjugate the coefficients."""
        conj = self.table.conj
        out: Dict[Exponent, GaussRat] = {}
        for exp, c in self.terms.items():
            swapped = [0] * len(exp)
            for k, power in enumerate(exp):
                if power:
                    swapped[conj[k]] += power
            out[tuple(swapped)] = c.conjugate()
        return GaussPoly._raw(self.table, out)

    # inspection -----------------------------------------------------------

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if isinstance(other, GaussPoly):
            return self.table == other.table and self.terms == other.terms
        try:
            return self == GaussPoly.const(self.table, GaussRat.coerce(other))
        except TypeError:
            return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def variables(self) -> List[str]:
        used = set()
        for exp in self.terms:
            used.update(k for k, p in enumerate(exp) if p)
        return [self.table.names[k] for k in sorted(used)]

    @staticmethod
    def _order_key(exp: Exponent):
        # graded lexicographic on the VarTable order
        return (sum(exp), exp)

    def sorted_terms(self) -> List[Tuple[Exponent, GaussRat]]:
        return sorted(self.terms.items(), key=lambda item: self._order_key(item[0]), reverse=True)

    def leading_coefficient(self) -> GaussRat:
        if not self.terms:
            return ZERO
        return self.sorted_terms()[0][1]

    def normalized(self) -> "GaussPoly":
        """Scale so the graded-lex leading coefficient is 1 (zero stays zero)."""
        lead = self.leading_coefficient()
        return self if not lead else self / lead

    def constant_term(self) -> GaussRat:
        return self.terms.get((0,) * len(self.table), ZERO)

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    # calculus in one variable --------------------------------------------

    def coefficient_in(self, name: str, power: int) -> "GaussPoly":
        """Coefficient of name**power, as a polynomial in the other variables."""
        k = self.table.index(name)
        out = {}
        for exp, c in self.terms.items():
            if exp[k] == power:
                e = list(exp)
                e[k] = 0
                out[tuple(e)] = c
        return GaussPoly._raw(self.table, out)

    def diff(self, name: str) -> "GaussPoly":
        k = self.table.index(name)
        out: Dict[Exponent, GaussRat] = {}
        for exp, c in self.terms.items():
            if exp[k]:
                e = list(exp)
                e[k] -= 1
                out[tuple(e)] = c * exp[k]
        return GaussPoly._raw(self.table, out)

    def subs(self, name: str, value) -> "GaussPoly":
        """Substitute an exact constant for one variable."""
        k = self.table.index(name)
        v = GaussRat.coerce(value)
        out = GaussPoly.zero(self.table)
        for exp, c in self.terms.items():
            e = list(exp)
            power = e[k]
            e[k] = 0
            out = out + GaussPoly._raw(self.table, {tuple(e): c * (v ** power)})
        return out

    def evaluate(self, assign: Mapping[str, complex], complete: bool = True) -> complex:
        """
        Floating-point value at a numeric assignment.

        Args:
            assign: Variable name to value; conjugate partners are filled in
            complete: Run VarTable.complete_assignment first

        Raises:
            AssignmentError: a used variable is missing or the pairing is violated
        """
        values = self.table.complete_assignment(assign) if complete else assign
        total = 0j
        for exp, c in self.terms.items():
            term = complex(c)
            for k, power in enumerate(exp):
                if power:
                    name = self.table.names[k]
                    if name not in values:
                        raise AssignmentError(f"variable {name!r} is not assigned")
                    term *= values[name] ** power
            total += term
        return total

    # rendering ------------------------------------------------------------

    def _monomial_text(self, exp: Exponent) -> str:
        parts = []
        for k, power in enumerate(exp):
            if power == 1:
                parts.append(self.table.names[k])
            elif power > 1:
                parts.append(f"{self.table.names[k]}^{power}")
        return "*".join(parts)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for idx, (exp, c) in enumerate(self.sorted_terms()):
            mono = self._monomial_text(exp)
            negative = (c.im == 0 and c.re < 0) or (c.re == 0 and c.im < 0)
            mag = -c if negative else c
            if not mono:
                body = str(mag)
            elif mag == ONE:
                body = mono
            else:
                body = f"{mag}*{mono}"
            if idx == 0:
                out.append(f"-{body}" if negative else body)
            else:
                out.append(f" - {body}" if negative else f" + {body}")
        return "".join(out)

    def __repr__(self) -> str:
        return f"GaussPoly({self})"

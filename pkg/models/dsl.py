"""
Model DSL
Interface Layer Component

Parser and canonical printer for ``.balg`` model files: the coframe algebra
with its characters, Hermitian metrics, deformation curves and metric
curves. The grammar is documented in models/GRAMMAR.md.

Parsing runs in two passes. The first builds an AST whose nodes carry
line/column spans; the second resolves names against the declared
variables and characters and builds engine objects.
"""

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from engine.calculus import VForm, d_squared_check
from engine.forms import Character, CoframeAlgebra, Weight, WForm, degree, form_conj, form_text, wedge
from engine.metrics import CONVENTIONS, HERMITIAN_STANDARD, HermMetric
from engine.obstruction import T_VAR, DeformationCurve, MetricCurve
from engine.scalars import GaussPoly, GaussRat, I, VarTable
from utils.errors import (
    AlgebraCheckError,
    BalobsError,
    BidegreeError,
    ModelSyntaxError,
    NonHermitianError,
    StructuralError,
    UndeclaredIdentifierError,
)

logger = logging.getLogger(__name__)

Value = Union[GaussPoly, WForm, VForm]

KEYWORDS = {"model", "dim", "var", "char", "assume", "d", "sectors", "metric", "metric_curve", "curve"}
RESERVED = {"i", "conj", "row", "convention", "real", "complex", "dlog10", "dlog01"}
ETA_RE = re.compile(r"e(\d+)$")
FRAME_RE = re.compile(r"Z(\d+)$")


# ---------------------------------------------------------------------------
# lexer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str    # NUMBER STRING IDENT OP NEWLINE EOF
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<COMMENT>\#[^\n]*)
  | (?P<NEWLINE>\n)
  | (?P<SKIP>[ \t\r]+)
  | (?P<NUMBER>\d+)
  | (?P<STRING>"[^"\n]*")
  | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<OP>[{}()\[\],;+\-*/^~@=])
  | (?P<MISMATCH>.)
    """,
    re.VERBOSE,
)


def tokenize(text: str, source: Optional[str] = None) -> List[Token]:
    """
    Split model text into tokens. Newlines inside parentheses or brackets
    are dropped so long expressions may wrap.
    """
    tokens: List[Token] = []
    line, line_start, depth = 1, 0, 0
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        value = m.group()
        col = m.start() - line_start + 1
        if kind == "NEWLINE":
            if depth == 0:
                tokens.append(Token("NEWLINE", "\n", line, col))
            line += 1
            line_start = m.end()
            continue
        if kind in ("SKIP", "COMMENT"):
            continue
        if kind == "MISMATCH":
            raise ModelSyntaxError(f"unexpected character {value!r}", line, col, source)
        if kind == "OP":
            if value in "([":
                depth += 1
            elif value in ")]":
                depth = max(0, depth - 1)
        tokens.append(Token(kind, value, line, col))
    tokens.append(Token("EOF", "", line, len(text) - line_start + 1))
    return tokens


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass
class Node:
    line: int
    col: int


@dataclass
class Num(Node):
    value: int


@dataclass
class ImagUnit(Node):
    pass


@dataclass
class Name(Node):
    name: str
    conj: bool = False


@dataclass
class Eta(Node):
    index: int
    bar: bool = False


@dataclass
class WeightExpr(Node):
    terms: List[Tuple[int, Optional[str]]] = field(default_factory=list)   # (power, character); None is literal 0


@dataclass
class Weighted(Node):
    weight: WeightExpr = None


@dataclass
class Conj(Node):
    operand: Node = None


@dataclass
class Neg(Node):
    operand: Node = None


@dataclass
class BinOp(Node):
    op: str = ""
    left: Node = None
    right: Node = None


@dataclass
class Power(Node):
    base: Node = None
    exponent: int = 1


@dataclass
class Tensor(Node):
    operand: Node = None
    index: int = 1


@dataclass
class ModelDecl(Node):
    name: str = ""


@dataclass
class DimDecl(Node):
    n: int = 0


@dataclass
class VarDecl(Node):
    name: str = ""
    real: bool = True


@dataclass
class CharDecl(Node):
    name: str = ""
    dlog10: Node = None
    dlog01: Node = None


@dataclass
class Assumption(Node):
    kind: str = ""
    text: str = ""


@dataclass
class StructureDecl(Node):
    index: int = 0
    expr: Node = None


@dataclass
class SectorsDecl(Node):
    weights: List[WeightExpr] = field(default_factory=list)


@dataclass
class MetricDecl(Node):
    name: str = ""
    convention: str = HERMITIAN_STANDARD
    rows: List[List[Node]] = field(default_factory=list)
    is_curve: bool = False


@dataclass
class CurveDecl(Node):
    name: str = ""
    terms: List[Node] = field(default_factory=list)


Statement = Union[ModelDecl, DimDecl, VarDecl, CharDecl, Assumption, StructureDecl, SectorsDecl, MetricDecl, CurveDecl]


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

class Parser:
    """Recursive-descent parser producing a list of statements."""

    def __init__(self, text: str, source: Optional[str] = None):
        self.source = source
        self.tokens = tokenize(text, source)
        self.pos = 0

    # token helpers ------------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.peek()
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    def at_op(self, *ops: str) -> bool:
        tok = self.peek()
        return tok.kind == "OP" and tok.text in ops

    def error(self, message: str, tok: Optional[Token] = None) -> ModelSyntaxError:
        tok = tok or self.peek()
        return ModelSyntaxError(message, tok.line, tok.col, self.source)

    def expect(self, kind: str, text: Optional[str] = None, what: Optional[str] = None) -> Token:
        if not self.at(kind, text):
            tok = self.peek()
            found = "end of input" if tok.kind == "EOF" else ("end of line" if tok.kind == "NEWLINE" else repr(tok.text))
            raise self.error(f"expected {what or text or kind.lower()}, found {found}")
        return self.advance()

    def skip_separators(self):
        while self.at("NEWLINE") or self.at_op(";"):
            self.advance()

    def end_statement(self):
        if self.at("EOF") or self.at_op("}"):
            return
        if not (self.at("NEWLINE") or self.at_op(";")):
            raise self.error(f"unexpected {self.peek().text!r} after statement")
        self.skip_separators()

    def word(self, what: str) -> str:
        """A hyphenated identifier such as ``nakamura-i`` or ``hermitian-standard``."""
        parts = [self.expect("IDENT", what=what).text]
        while self.at_op("-") and self.peek(1).kind == "IDENT":
            self.advance()
            parts.append(self.advance().text)
        return "-".join(parts)

    # statements ---------------------------------------------------------

    def parse(self) -> List[Statement]:
        statements: List[Statement] = []
        self.skip_separators()
        while not self.at("EOF"):
            statements.extend(self.statement())
            self.end_statement()
        return statements

    def statement(self) -> List[Statement]:
        """One declaration; a var line with several names yields one VarDecl each."""
        decl = self.declaration()
        return decl if isinstance(decl, list) else [decl]

    def declaration(self):
        tok = self.peek()
        if tok.kind != "IDENT" or tok.text not in KEYWORDS:
            raise self.error(f"expected a declaration, found {tok.text!r}")
        self.advance()
        kw = tok.text
        if kw == "model":
            return ModelDecl(tok.line, tok.col, self.word("model name"))
        if kw == "dim":
            return DimDecl(tok.line, tok.col, int(self.expect("NUMBER", what="dimension").text))
        if kw == "var":
            return self.var_decl(tok)
        if kw == "char":
            return self.char_decl(tok)
        if kw == "assume":
            kind = self.expect("IDENT", what="assumption kind").text
            text = self.expect("STRING", what="quoted assumption text").text[1:-1]
            return Assumption(tok.line, tok.col, kind, text)
        if kw == "d":
            target = self.expect("IDENT", what="coframe generator e<k>")
            m = ETA_RE.match(target.text)
            if not m:
                raise self.error("structure equations are written 'd e<k> = ...'", target)
            self.expect("OP", "=")
            return StructureDecl(tok.line, tok.col, int(m.group(1)), self.expression())
        if kw == "sectors":
            weights = [self.weight()]
            while self.at_op(","):
                self.advance()
                weights.append(self.weight())
            return SectorsDecl(tok.line, tok.col, weights)
        if kw in ("metric", "metric_curve"):
            return self.metric_decl(tok, is_curve=kw == "metric_curve")
        return self.curve_decl(tok)

    def var_decl(self, tok: Token) -> List[VarDecl]:
        names = [self.expect("IDENT", what="variable name")]
        while self.at_op(","):
            self.advance()
            names.append(self.expect("IDENT", what="variable name"))
        kind = self.expect("IDENT", what="'real' or 'complex'")
        if kind.text not in ("real", "complex"):
            raise self.error("expected 'real' or 'complex'", kind)
        return [VarDecl(n.line, n.col, n.text, kind.text == "real") for n in names]

    def char_decl(self, tok: Token) -> CharDecl:
        name = self.expect("IDENT", what="character name").text
        self.expect("OP", "{")
        entries: Dict[str, Node] = {}
        self.skip_separators()
        while not self.at_op("}"):
            key = self.expect("IDENT", what="'dlog10' or 'dlog01'")
            if key.text not in ("dlog10", "dlog01"):
                raise self.error("expected 'dlog10' or 'dlog01'", key)
            if key.text in entries:
                raise self.error(f"{key.text} given twice", key)
            self.expect("OP", "=")
            entries[key.text] = self.expression()
            self.end_statement()
        close = self.expect("OP", "}")
        for key in ("dlog10", "dlog01"):
            if key not in entries:
                raise self.error(f"character {name!r} is missing {key}", close)
        return CharDecl(tok.line, tok.col, name, entries["dlog10"], entries["dlog01"])

    def metric_decl(self, tok: Token, is_curve: bool) -> MetricDecl:
        name = self.expect("IDENT", what="metric name").text
        convention = HERMITIAN_STANDARD
        if self.at("IDENT", "convention"):
            self.advance()
            conv_tok = self.peek()
            convention = self.word("convention name")
            if convention not in CONVENTIONS:
                raise self.error(f"unknown convention {convention!r}; expected one of {', '.join(CONVENTIONS)}", conv_tok)
        self.expect("OP", "{")
        rows: List[List[Node]] = []
        self.skip_separators()
        while not self.at_op("}"):
            self.expect("IDENT", "row", what="'row'")
            row = [self.expression()]
            while self.at_op(","):
                self.advance()
                row.append(self.expression())
            rows.append(row)
            self.end_statement()
        self.expect("OP", "}")
        return MetricDecl(tok.line, tok.col, name, convention, rows, is_curve)

    def curve_decl(self, tok: Token) -> CurveDecl:
        name = self.expect("IDENT", what="curve name").text
        self.expect("OP", "{")
        terms: List[Node] = []
        self.skip_separators()
        while not self.at_op("}"):
            terms.append(self.expression())
            self.end_statement()
        self.expect("OP", "}")
        return CurveDecl(tok.line, tok.col, name, terms)

    # weights ------------------------------------------------------------

    def weight(self) -> WeightExpr:
        start = self.peek()
        terms: List[Tuple[int, Optional[str]]] = []
        sign = 1
        if self.at_op("+", "-"):
            sign = -1 if self.advance().text == "-" else 1
        while True:
            power = 1
            if self.at("NUMBER"):
                num = int(self.advance().text)
                if self.at_op("*"):
                    self.advance()
                    power = num
                elif num == 0:
                    terms.append((0, None))
                    power = None
                else:
                    raise self.error("a weight is a sum of multiples of characters", start)
            if power is not None:
                name = self.expect("IDENT", what="character name").text
                terms.append((sign * power, name))
            if not self.at_op("+", "-"):
                break
            sign = -1 if self.advance().text == "-" else 1
        return WeightExpr(start.line, start.col, terms)

    # expressions --------------------------------------------------------
    #
    #   expression := product_term (('+' | '-') product_term)*
    #   product_term := product ['@' Z<k>]
    #   product    := unary (('*' | '/') unary)*
    #   unary      := '-' unary | '+' unary | power
    #   power      := atom ('^' (NUMBER | atom))*

    def expression(self) -> Node:
        left = self.product_term()
        while self.at_op("+", "-"):
            op = self.advance()
            right = self.product_term()
            left = BinOp(op.line, op.col, op.text, left, right)
        return left

    def product_term(self) -> Node:
        node = self.product()
        if self.at_op("@"):
            at = self.advance()
            frame = self.expect("IDENT", what="frame vector Z<k>")
            m = FRAME_RE.match(frame.text)
            if not m:
                raise self.error("expected a frame vector Z<k> after '@'", frame)
            node = Tensor(at.line, at.col, node, int(m.group(1)))
        return node

    def product(self) -> Node:
        left = self.unary()
        while self.at_op("*", "/"):
            op = self.advance()
            right = self.unary()
            left = BinOp(op.line, op.col, op.text, left, right)
        return left

    def unary(self) -> Node:
        if self.at_op("-"):
            tok = self.advance()
            return Neg(tok.line, tok.col, self.unary())
        if self.at_op("+"):
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        left = self.atom()
        while self.at_op("^"):
            op = self.advance()
            if self.at("NUMBER"):
                left = Power(op.line, op.col, left, int(self.advance().text))
            else:
                left = BinOp(op.line, op.col, "^", left, self.atom())
        return left

    def atom(self) -> Node:
        tok = self.peek()
        if tok.kind == "NUMBER":
            self.advance()
            return Num(tok.line, tok.col, int(tok.text))
        if tok.kind == "OP" and tok.text == "(":
            self.advance()
            node = self.expression()
            self.expect("OP", ")")
            return node
        if tok.kind == "OP" and tok.text == "[":
            self.advance()
            w = self.weight()
            self.expect("OP", "]")
            return Weighted(tok.line, tok.col, w)
        if tok.kind == "OP" and tok.text == "~":
            self.advance()
            target = self.expect("IDENT", what="variable or coframe generator after '~'")
            m = ETA_RE.match(target.text)
            if m:
                return Eta(tok.line, tok.col, int(m.group(1)), bar=True)
            return Name(tok.line, tok.col, target.text, conj=True)
        if tok.kind == "IDENT":
            self.advance()
            if tok.text == "i":
                return ImagUnit(tok.line, tok.col)
            if tok.text == "conj":
                self.expect("OP", "(")
                inner = self.expression()
                self.expect("OP", ")")
                return Conj(tok.line, tok.col, inner)
            m = ETA_RE.match(tok.text)
            if m:
                return Eta(tok.line, tok.col, int(m.group(1)))
            return Name(tok.line, tok.col, tok.text)
        if tok.kind in ("EOF", "NEWLINE"):
            prev = self.tokens[self.pos - 1] if self.pos else tok
            if prev.kind == "OP":
                raise self.error(f"dangling operator {prev.text!r}", prev)
            raise self.error("unexpected end of expression")
        raise self.error(f"unexpected {tok.text!r} in expression")


def parse_statements(text: str, source: Optional[str] = None) -> List[Statement]:
    """Syntax pass only."""
    return Parser(text, source).parse()


# ---------------------------------------------------------------------------
# resolution
# ---------------------------------------------------------------------------

@dataclass
class ModelFile:
    """A parsed model: the AST plus the engine objects it declares."""
    name: str
    algebra: CoframeAlgebra
    statements: List[Statement]
    sectors: List[Weight]
    metrics: Dict[str, HermMetric] = field(default_factory=dict)
    curves: Dict[str, DeformationCurve] = field(default_factory=dict)
    metric_curves: Dict[str, MetricCurve] = field(default_factory=dict)
    assumptions: List[Assumption] = field(default_factory=list)
    source: Optional[str] = None

    @property
    def var_table(self) -> VarTable:
        return self.algebra.var_table

    @property
    def characters(self) -> Tuple[Character, ...]:
        return self.algebra.characters

    def _pick(self, table: dict, name: Optional[str], what: str):
        if name is None:
            if not table:
                raise UndeclaredIdentifierError(f"model {self.name!r} declares no {what}", source=self.source)
            return next(iter(table.values()))
        if name not in table:
            known = ", ".join(table) or "none"
            raise UndeclaredIdentifierError(f"no {what} named {name!r} (declared: {known})", source=self.source)
        return table[name]

    def metric(self, name: Optional[str] = None) -> HermMetric:
        return self._pick(self.metrics, name, "metric")

    def curve(self, name: Optional[str] = None) -> DeformationCurve:
        return self._pick(self.curves, name, "curve")

    def metric_curve(self, name: Optional[str] = None) -> MetricCurve:
        """A declared metric curve, or the constant curve through the default metric."""
        if name is None and not self.metric_curves:
            return MetricCurve.constant(self.metric())
        return self._pick(self.metric_curves, name, "metric curve")


class _Resolver:
    """Evaluates expression nodes over one algebra."""

    def __init__(self, algebra: CoframeAlgebra, source: Optional[str]):
        self.algebra = algebra
        self.table = algebra.var_table
        self.source = source

    def where(self, node: Node) -> str:
        prefix = f"{self.source}:" if self.source else ""
        return f"{prefix}{node.line}:{node.col}"

    def syntax(self, node: Node, message: str) -> ModelSyntaxError:
        return ModelSyntaxError(message, node.line, node.col, self.source)

    # values -------------------------------------------------------------

    def as_form(self, value: Value, node: Node) -> WForm:
        if isinstance(value, VForm):
            raise self.syntax(node, "a vector-valued term cannot be used as a form")
        if isinstance(value, GaussPoly):
            return self.algebra.one().scale(value)
        return value

    def weight(self, w: WeightExpr) -> Weight:
        out = list(self.algebra.zero_weight)
        names = [ch.name for ch in self.algebra.characters]
        for power, name in w.terms:
            if name is None:
                continue
            if name not in names:
                raise UndeclaredIdentifierError(f"undeclared character {name!r}", w.line, w.col, self.source)
            out[names.index(name)] += power
        return tuple(out)

    def eval(self, node: Node) -> Value:
        if isinstance(node, Num):
            return GaussPoly.const(self.table, node.value)
        if isinstance(node, ImagUnit):
            return GaussPoly.const(self.table, I)
        if isinstance(node, Name):
            return self.name(node)
        if isinstance(node, Eta):
            if not 1 <= node.index <= self.algebra.n:
                raise self.syntax(node, f"coframe index {node.index} out of range 1..{self.algebra.n}")
            return self.algebra.etabar(node.index) if node.bar else self.algebra.eta(node.index)
        if isinstance(node, Weighted):
            return self.algebra.mono(weight=self.weight(node.weight))
        if isinstance(node, Neg):
            return -self.eval(node.operand)
        if isinstance(node, Conj):
            value = self.eval(node.operand)
            if isinstance(value, VForm):
                raise self.syntax(node, "conj() of a vector-valued term is not defined")
            return value.conjugate() if isinstance(value, GaussPoly) else form_conj(value)
        if isinstance(node, Power):
            return self.power(node)
        if isinstance(node, Tensor):
            return self.tensor(node)
        if isinstance(node, BinOp):
            return self.binop(node)
        raise self.syntax(node, f"cannot evaluate {type(node).__name__}")

    def name(self, node: Name) -> GaussPoly:
        name = node.name
        if name in KEYWORDS or name in RESERVED:
            raise self.syntax(node, f"{name!r} is a reserved word")
        if name not in self.table:
            if any(ch.name == name for ch in self.algebra.characters):
                raise self.syntax(node, f"character {name!r} can only appear inside a weight [...]")
            raise UndeclaredIdentifierError(f"undeclared identifier {name!r}", node.line, node.col, self.source)
        if node.conj:
            name = self.table.conj_name(name)
        return GaussPoly.var(self.table, name)

    def power(self, node: Power) -> Value:
        base = self.eval(node.base)
        if isinstance(base, GaussPoly):
            return base ** node.exponent
        if isinstance(base, VForm):
            raise self.syntax(node, "powers of vector-valued terms are not defined")
        result = self.algebra.one()
        for _ in range(node.exponent):
            result = wedge(result, base)
        return result

    def tensor(self, node: Tensor) -> VForm:
        if not 1 <= node.index <= self.algebra.n:
            raise self.syntax(node, f"frame vector Z{node.index} out of range 1..{self.algebra.n}")
        form = self.as_form(self.eval(node.operand), node)
        comps = [self.algebra.zero() for _ in range(self.algebra.n)]
        comps[node.index - 1] = form
        return VForm(self.algebra, comps, q=None)

    def binop(self, node: BinOp) -> Value:
        left = self.eval(node.left)
        right = self.eval(node.right)
        op = node.op
        if op in "+-":
            if isinstance(left, GaussPoly) and isinstance(right, GaussPoly):
                return left + right if op == "+" else left - right
            if isinstance(left, VForm) and isinstance(right, VForm):
                return left + right if op == "+" else left - right
            if isinstance(left, VForm) or isinstance(right, VForm):
                raise self.syntax(node, "cannot add a vector-valued term to a form or scalar")
            a, b = self.as_form(left, node), self.as_form(right, node)
            return a + b if op == "+" else a - b
        if op == "*":
            if isinstance(left, GaussPoly) and isinstance(right, GaussPoly):
                return left * right
            if isinstance(left, GaussPoly):
                return right.scale(left)
            if isinstance(right, GaussPoly):
                return left.scale(right)
            if isinstance(left, VForm) or isinstance(right, VForm):
                raise self.syntax(node, "a vector-valued term can only be multiplied by a scalar")
            if degree(left) == 0 or degree(right) == 0 or not left or not right:
                return wedge(left, right)
            raise self.syntax(node, "use '^' to wedge forms of positive degree")
        if op == "/":
            if not isinstance(right, GaussPoly) or not right.is_constant() or not right:
                raise self.syntax(node, "division is only by a nonzero constant")
            inverse = right.constant_term().inverse()
            return left * inverse if isinstance(left, GaussPoly) else left.scale(inverse)
        if op == "^":
            if isinstance(left, VForm) or isinstance(right, VForm):
                raise self.syntax(node, "cannot wedge a vector-valued term")
            return wedge(self.as_form(left, node), self.as_form(right, node))
        raise self.syntax(node, f"unknown operator {op!r}")

    # constant forms -----------------------------------------------------

    def constant_terms(self, value: Value, node: Node, what: str) -> Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], GaussRat]:
        form = self.as_form(value, node)
        out = {}
        for (w, h, a), c in form.terms.items():
            if any(w):
                raise self.syntax(node, f"{what} cannot carry a character weight")
            if not c.is_constant():
                raise self.syntax(node, f"{what} must have Gaussian-rational coefficients, got {c}")
            out[(h, a)] = c.constant_term()
        return out


def _resolve(statements: List[Statement], source: Optional[str]) -> ModelFile:
    def fail(node: Node, message: str, cls=ModelSyntaxError):
        return cls(message, node.line, node.col, source)

    def where(node: Node) -> str:
        return f"{source + ':' if source else ''}{node.line}:{node.col}"

    models = [s for s in statements if isinstance(s, ModelDecl)]
    dims = [s for s in statements if isinstance(s, DimDecl)]
    if len(models) > 1:
        raise fail(models[1], "model name declared twice")
    if not dims:
        raise ModelSyntaxError("missing 'dim' declaration", 1, 1, source)
    if len(dims) > 1:
        raise fail(dims[1], "dimension declared twice")
    n = dims[0].n
    if n < 1:
        raise fail(dims[0], "dimension must be positive")
    name = models[0].name if models else (Path(source).stem if source else "model")

    # variables; t is always present and real
    declarations: List[Tuple[str, bool]] = []
    seen: Dict[str, VarDecl] = {}
    for s in statements:
        if not isinstance(s, VarDecl):
            continue
        if s.name in KEYWORDS or s.name in RESERVED or ETA_RE.match(s.name) or FRAME_RE.match(s.name):
            raise fail(s, f"{s.name!r} cannot be used as a variable name")
        if s.name in seen:
            raise fail(s, f"variable {s.name!r} declared twice")
        if s.name == T_VAR and not s.real:
            raise fail(s, f"{T_VAR!r} is reserved as the real curve parameter")
        seen[s.name] = s
        declarations.append((s.name, s.real))
    if T_VAR not in seen:
        declarations.append((T_VAR, True))
    table = VarTable.from_declarations(declarations)

    # characters, read over the bare coframe
    bare = CoframeAlgebra(n, [{}] * n, [], table, name)
    char_nodes: Dict[str, CharDecl] = {}
    characters: List[Character] = []
    for s in statements:
        if not isinstance(s, CharDecl):
            continue
        if s.name in char_nodes:
            raise fail(s, f"character {s.name!r} declared twice")
        if s.name in seen or s.name in KEYWORDS or s.name in RESERVED:
            raise fail(s, f"character name {s.name!r} clashes with a variable or keyword")
        resolver = _Resolver(bare, source)
        entries = []
        for key, expr, (p, q) in (("dlog10", s.dlog10, (1, 0)), ("dlog01", s.dlog01, (0, 1))):
            terms = resolver.constant_terms(resolver.eval(expr), expr, key)
            coeffs = [GaussRat(0)] * n
            for (h, a), c in terms.items():
                if (len(h), len(a)) != (p, q):
                    raise fail(expr, f"{key} of character {s.name!r} must be a ({p},{q})-form", BidegreeError)
                coeffs[(h + a)[0] - 1] = c
            entries.append(tuple(coeffs))
        char_nodes[s.name] = s
        characters.append(Character(s.name, entries[0], entries[1]))

    # structure equations over the coframe with characters
    with_chars = CoframeAlgebra(n, [{}] * n, characters, table, name)
    resolver = _Resolver(with_chars, source)
    structure: List[dict] = [{} for _ in range(n)]
    structure_nodes: Dict[int, StructureDecl] = {}
    for s in statements:
        if not isinstance(s, StructureDecl):
            continue
        if not 1 <= s.index <= n:
            raise fail(s, f"coframe index {s.index} out of range 1..{n}")
        if s.index in structure_nodes:
            raise fail(s, f"d e{s.index} declared twice")
        structure_nodes[s.index] = s
        structure[s.index - 1] = resolver.constant_terms(resolver.eval(s.expr), s.expr, f"d e{s.index}")
    try:
        algebra = CoframeAlgebra(n, structure, characters, table, name)
    except AlgebraCheckError as exc:
        k = int(re.search(r"d e(\d+)", str(exc)).group(1))
        raise AlgebraCheckError(f"{where(structure_nodes[k])}: {exc}") from None

    report = d_squared_check(algebra)
    if not report.passed:
        first = report.violations[0]
        label = first.split(":", 1)[0]
        m = re.search(r"e(\d+)$", label)
        anchor: Node = dims[0]
        if m and int(m.group(1)) in structure_nodes:
            anchor = structure_nodes[int(m.group(1))]
        elif label.startswith("char "):
            anchor = char_nodes.get(label[5:], anchor)
        raise AlgebraCheckError(f"{where(anchor)}: d^2 != 0 on generator {label}: {'; '.join(report.violations)}")

    resolver = _Resolver(algebra, source)
    model = ModelFile(name=name, algebra=algebra, statements=statements, sectors=[], source=source)

    sector_decls = [s for s in statements if isinstance(s, SectorsDecl)]
    if len(sector_decls) > 1:
        raise fail(sector_decls[1], "sectors declared twice")
    if sector_decls:
        weights = [resolver.weight(w) for w in sector_decls[0].weights]
        model.sectors = list(dict.fromkeys(weights))
    else:
        model.sectors = [algebra.zero_weight]
        for ch in characters:
            model.sectors += [algebra.unit_weight(ch.name, 1), algebra.unit_weight(ch.name, -1)]

    for s in statements:
        if isinstance(s, Assumption):
            model.assumptions.append(s)
        elif isinstance(s, MetricDecl):
            target = model.metric_curves if s.is_curve else model.metrics
            if s.name in target:
                raise fail(s, f"{'metric curve' if s.is_curve else 'metric'} {s.name!r} declared twice")
            if len(s.rows) != n or any(len(row) != n for row in s.rows):
                raise fail(s, f"metric {s.name!r} must have {n} rows of {n} entries")
            matrix = []
            for row in s.rows:
                entries = []
                for expr in row:
                    value = resolver.eval(expr)
                    if not isinstance(value, GaussPoly):
                        raise fail(expr, "metric entries must be scalars")
                    entries.append(value)
                matrix.append(entries)
            try:
                metric = HermMetric(matrix, s.convention, s.name)
            except NonHermitianError as exc:
                raise NonHermitianError(f"{where(s)}: {exc}") from None
            if s.is_curve:
                target[s.name] = MetricCurve(s.name, metric)
            else:
                if T_VAR in {v for row in matrix for e in row for v in e.variables()}:
                    raise fail(s, f"metric {s.name!r} depends on {T_VAR}; declare it as a metric_curve")
                target[s.name] = metric
        elif isinstance(s, CurveDecl):
            if s.name in model.curves:
                raise fail(s, f"curve {s.name!r} declared twice")
            model.curves[s.name] = _build_curve(resolver, s, where)
    logger.info(
        f"Parsed model {name}: n={n}, {len(characters)} character(s), {len(model.metrics)} metric(s), "
        f"{len(model.curves)} curve(s), {len(model.metric_curves)} metric curve(s)"
    )
    return model


def _build_curve(resolver: _Resolver, decl: CurveDecl, where) -> DeformationCurve:
    algebra = resolver.algebra
    total = VForm.zero(algebra, q=None)
    for expr in decl.terms:
        value = resolver.eval(expr)
        if not isinstance(value, VForm):
            if not value:
                continue
            raise BidegreeError(f"{where(expr)}: curve terms must be vector-valued (use '@ Z<k>')")
        total = total + value
    try:
        phi = VForm(algebra, total.components, q=1)
    except BidegreeError as exc:
        raise BidegreeError(f"{where(decl)}: curve {decl.name!r}: {exc}") from None
    try:
        return DeformationCurve(decl.name, phi)
    except StructuralError as exc:
        raise StructuralError(f"{where(decl)}: {exc}") from None


def parse(text: str, source: Optional[str] = None) -> ModelFile:
    """
    Parse model text into a ModelFile.

    Raises:
        ModelSyntaxError: malformed input, with line and column
        UndeclaredIdentifierError: a variable or character that is never declared
        BidegreeError: a curve component that is not of type (0,1)
        NonHermitianError: a metric block that is not conjugate-symmetric
        AlgebraCheckError: d² ≠ 0 on some generator, or a (0,2) structure term
    """
    return _resolve(parse_statements(text, source), source)


def parse_file(path: Union[str, Path]) -> ModelFile:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise BalobsError(f"cannot read model file {path}: {exc}") from None
    return parse(text, source=str(path))


# ---------------------------------------------------------------------------
# printer
# ---------------------------------------------------------------------------

def _metric_block(keyword: str, name: str, metric: HermMetric) -> List[str]:
    lines = [f"{keyword} {name} convention {metric.convention} {{"]
    for row in metric.matrix:
        lines.append("  row " + ", ".join(str(e) for e in row))
    lines.append("}")
    return lines


def print_model(model: ModelFile) -> str:
    """Canonical text of a model; parse(print_model(m)) prints identically."""
    algebra = model.algebra
    table = algebra.var_table
    lines = [f"model {model.name}", f"dim {algebra.n}"]
    for base in table.base_names():
        lines.append(f"var {base} {'real' if table.is_real(base) else 'complex'}")
    for ch in algebra.characters:
        ten = form_text(WForm(algebra, {(algebra.zero_weight, (k,), ()): algebra.poly(c) for k, c in enumerate(ch.dlog10, 1)}))
        one = form_text(WForm(algebra, {(algebra.zero_weight, (), (k,)): algebra.poly(c) for k, c in enumerate(ch.dlog01, 1)}))
        lines.append(f"char {ch.name} {{ dlog10 = {ten}; dlog01 = {one} }}")
    for a in model.assumptions:
        lines.append(f'assume {a.kind} "{a.text}"')
    for k in range(1, algebra.n + 1):
        d_eta = algebra.d_eta(k)
        if d_eta:
            lines.append(f"d e{k} = {form_text(d_eta)}")
    if model.sectors:
        lines.append("sectors " + ", ".join(algebra.weight_text(w) for w in model.sectors))
    for name, metric in model.metrics.items():
        lines.extend(_metric_block("metric", name, metric))
    for name, mc in model.metric_curves.items():
        lines.extend(_metric_block("metric_curve", name, mc.metric))
    for name, curve in model.curves.items():
        lines.append(f"curve {name} {{")
        lines.append(f"  {curve.phi.text(dsl=True)}")
        lines.append("}")
    return "\n".join(lines) + "\n"


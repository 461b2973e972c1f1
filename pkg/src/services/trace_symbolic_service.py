"""
Symbolic trace polynomials.

The graded recursions are run with traces as formal symbols: even traces
(tr(A^i), tr(B^{2i})) generate a commutative polynomial ring over Q, and the
odd traces (tr(A^r B A^s), tr(B^t) with t odd) only ever appear linearly,
each multiplied by an even polynomial. Substituting the concrete traces of a
pair (A, B) is a ring homomorphism onto the concrete data.

S-expression form of an emitted identity::

    identity := (identity THM N TERM*)
    TERM     := (term PATTERN COEFF)
    PATTERN  := (I) | (pow BASE K) | (words K)
    COEFF    := (even MONO*) | (odd LIN*)
    LIN      := (lin SYMBOL (even MONO*))
    MONO     := (mono RATIONAL FACTOR*)
    FACTOR   := (^ SYMBOL EXP)
    SYMBOL   := (trA i) | (trAB r s) | (trBB i) | (trB t)
"""

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

import sympy as sp

from src.algebra.grassmann import AlgebraConfig, GrassmannElement, sum_elements
from src.algebra.supermatrix import MatrixE, identity_matrix, mat_powers, trace, zero_matrix
from src.core.errors import AlgebraError, FormatError, IdentityViolationError, ShapeError
from src.core.logging_config import LoggerMixin
from src.services.graded_identity_service import (
    GradedCharData,
    mixed_pairs,
    require_odd,
    require_pair,
    word_sum,
)

Rational = Union[int, Fraction]


class SymbolKind(str, Enum):
    EVEN_A = "trA"
    MIXED_ODD = "trAB"
    EVEN_B2 = "trBB"
    ODD_B = "trB"


_KIND_RANK = {SymbolKind.EVEN_A: 0, SymbolKind.MIXED_ODD: 1, SymbolKind.EVEN_B2: 2, SymbolKind.ODD_B: 3}
_ARITY = {SymbolKind.EVEN_A: 1, SymbolKind.MIXED_ODD: 2, SymbolKind.EVEN_B2: 1, SymbolKind.ODD_B: 1}
_SYMBOL_NAME = re.compile(r"^(trAB|trBB|trA|trB)((?:_\d+)+)$")


@dataclass(frozen=True)
class TraceSymbol:
    """
    A formal trace.

    EVEN_A(i) = tr(A^i), i >= 1; MIXED_ODD(r, s) = tr(A^r B A^s), r, s >= 0;
    EVEN_B2(i) = tr(B^{2i}), i >= 1; ODD_B(t) = tr(B^t), t >= 1 odd.
    MIXED_ODD(r, s) and MIXED_ODD(r', s') stay distinct even when r + s = r' + s'.
    """

    kind: SymbolKind
    params: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.params) != _ARITY[self.kind]:
            raise FormatError(f"{self.kind.value} takes {_ARITY[self.kind]} parameter(s), got {self.params}")
        if any(p < 0 for p in self.params):
            raise FormatError(f"negative trace parameter in {self.params}")
        if self.kind in (SymbolKind.EVEN_A, SymbolKind.EVEN_B2, SymbolKind.ODD_B) and self.params[0] < 1:
            raise FormatError(f"{self.kind.value} needs a positive exponent")
        if self.kind is SymbolKind.ODD_B and self.params[0] % 2 == 0:
            raise FormatError(f"tr(B^{self.params[0]}) is even; use {SymbolKind.EVEN_B2.value}")

    @classmethod
    def even_a(cls, i: int) -> "TraceSymbol":
        return cls(SymbolKind.EVEN_A, (i,))

    @classmethod
    def mixed(cls, r: int, s: int) -> "TraceSymbol":
        return cls(SymbolKind.MIXED_ODD, (r, s))

    @classmethod
    def even_b2(cls, i: int) -> "TraceSymbol":
        return cls(SymbolKind.EVEN_B2, (i,))

    @classmethod
    def odd_b(cls, t: int) -> "TraceSymbol":
        return cls(SymbolKind.ODD_B, (t,))

    @property
    def is_odd(self) -> bool:
        return self.kind in (SymbolKind.MIXED_ODD, SymbolKind.ODD_B)

    @property
    def sort_key(self) -> Tuple[int, Tuple[int, ...]]:
        return _KIND_RANK[self.kind], self.params

    @property
    def name(self) -> str:
        return self.kind.value + "".join(f"_{p}" for p in self.params)

    @property
    def symbol(self) -> sp.Symbol:
        return sp.Symbol(self.name)

    @classmethod
    def from_symbol(cls, symbol: sp.Symbol) -> "TraceSymbol":
        match = _SYMBOL_NAME.match(symbol.name)
        if not match:
            raise FormatError(f"{symbol.name!r} is not a trace symbol")
        params = tuple(int(p) for p in match.group(2).split("_")[1:])
        return cls(SymbolKind(match.group(1)), params)

    def argument(self) -> str:
        """LaTeX of the matrix word inside tr(...)."""
        if self.kind is SymbolKind.EVEN_A:
            return _power_latex("A", self.params[0])
        if self.kind is SymbolKind.MIXED_ODD:
            r, s = self.params
            return _power_latex("A", r) + "B" + _power_latex("A", s)
        if self.kind is SymbolKind.EVEN_B2:
            return _power_latex("B", 2 * self.params[0])
        return _power_latex("B", self.params[0])

    def latex(self, exponent: int = 1) -> str:
        head = r"\mathrm{tr}" if exponent == 1 else rf"\mathrm{{tr}}^{{{exponent}}}"
        return f"{head}({self.argument()})"

    def to_json(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "params": list(self.params)}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "TraceSymbol":
        try:
            return cls(SymbolKind(data["kind"]), tuple(int(p) for p in data["params"]))
        except (KeyError, TypeError, ValueError) as e:
            raise FormatError(f"bad trace symbol {data!r}") from e

    def to_sexpr(self) -> str:
        return "(" + " ".join([self.kind.value, *map(str, self.params)]) + ")"


def _power_latex(base: str, k: int) -> str:
    if k == 0:
        return ""
    if k == 1:
        return base
    return f"{base}^{{{k}}}"


def _to_sympy(value: Rational) -> sp.Rational:
    value = Fraction(value)
    return sp.Rational(value.numerator, value.denominator)


def _to_fraction(value: Any) -> Fraction:
    r = sp.Rational(value)
    return Fraction(int(r.p), int(r.q))


Factor = Tuple[TraceSymbol, int]
Monomial = Tuple[Fraction, Tuple[Factor, ...]]


class EvenTracePoly:
    """Polynomial over Q in even trace symbols, kept in expanded form."""

    __slots__ = ("_expr",)

    def __init__(self, expr: Any = 0):
        expr = sp.expand(sp.sympify(expr))
        for s in expr.free_symbols:
            if TraceSymbol.from_symbol(s).is_odd:
                raise FormatError(f"odd trace {s.name} inside an even polynomial")
        self._expr = expr

    @classmethod
    def zero(cls) -> "EvenTracePoly":
        return cls(0)

    @classmethod
    def one(cls) -> "EvenTracePoly":
        return cls(1)

    @classmethod
    def constant(cls, value: Rational) -> "EvenTracePoly":
        return cls(_to_sympy(value))

    @classmethod
    def of(cls, symbol: TraceSymbol) -> "EvenTracePoly":
        return cls(symbol.symbol)

    @classmethod
    def from_terms(cls, monomials: Iterable[Monomial]) -> "EvenTracePoly":
        expr = sp.Integer(0)
        for coeff, factors in monomials:
            product = _to_sympy(coeff)
            for symbol, exp in factors:
                product *= symbol.symbol ** exp
            expr += product
        return cls(expr)

    @property
    def expr(self) -> sp.Expr:
        return self._expr

    @property
    def is_zero(self) -> bool:
        return self._expr == 0

    def generators(self) -> List[TraceSymbol]:
        return sorted((TraceSymbol.from_symbol(s) for s in self._expr.free_symbols), key=lambda t: t.sort_key)

    def terms(self) -> List[Monomial]:
        """Nonzero monomials in descending lex order over the sorted generators."""
        gens = self.generators()
        if not gens:
            return [] if self.is_zero else [(_to_fraction(self._expr), ())]
        poly = sp.Poly(self._expr, *[g.symbol for g in gens])
        out = []
        for exps, coeff in poly.terms(order="lex"):
            factors = tuple((g, e) for g, e in zip(gens, exps) if e)
            out.append((_to_fraction(coeff), factors))
        return out

    def _coerce(self, other: Any) -> Optional["EvenTracePoly"]:
        if isinstance(other, EvenTracePoly):
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return EvenTracePoly.constant(other)
        return None

    def __add__(self, other: Any) -> "EvenTracePoly":
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return EvenTracePoly(self._expr + rhs._expr)

    __radd__ = __add__

    def __neg__(self) -> "EvenTracePoly":
        return EvenTracePoly(-self._expr)

    def __sub__(self, other: Any) -> "EvenTracePoly":
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return EvenTracePoly(self._expr - rhs._expr)

    def __mul__(self, other: Any) -> "EvenTracePoly":
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return EvenTracePoly(self._expr * rhs._expr)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return sp.expand(self._expr - rhs._expr) == 0

    def __hash__(self) -> int:
        return hash(self._expr)

    def evaluate(self, values: Mapping[TraceSymbol, GrassmannElement], config: AlgebraConfig) -> GrassmannElement:
        total = GrassmannElement.zero(config)
        for coeff, factors in self.terms():
            product = GrassmannElement.scalar(config, coeff)
            for symbol, exp in factors:
                for _ in range(exp):
                    product = product * values[symbol]
            total = total + product
        return total

    def to_json(self) -> Dict[str, Any]:
        return {
            "parity": "even",
            "monomials": [
                {"coeff": str(c), "factors": [{"symbol": s.to_json(), "exp": e} for s, e in factors]}
                for c, factors in self.terms()
            ],
        }

    def to_sexpr(self) -> str:
        monos = []
        for c, factors in self.terms():
            parts = ["mono", str(c)] + [f"(^ {s.to_sexpr()} {e})" for s, e in factors]
            monos.append("(" + " ".join(parts) + ")")
        return "(" + " ".join(["even", *monos]) + ")"

    def __repr__(self) -> str:
        return f"EvenTracePoly({self._expr})"


class OddTraceLinear:
    """sum_j c_j * t_j over odd trace symbols t_j with even polynomial coefficients c_j."""

    __slots__ = ("_items",)

    def __init__(self, coeffs: Optional[Mapping[TraceSymbol, EvenTracePoly]] = None):
        items = []
        for symbol, coeff in (coeffs or {}).items():
            if not symbol.is_odd:
                raise FormatError(f"{symbol.name} is even; odd-linear maps are keyed by odd traces")
            if not coeff.is_zero:
                items.append((symbol, coeff))
        self._items: Tuple[Tuple[TraceSymbol, EvenTracePoly], ...] = tuple(sorted(items, key=lambda i: i[0].sort_key))

    @classmethod
    def zero(cls) -> "OddTraceLinear":
        return cls()

    @classmethod
    def of(cls, symbol: TraceSymbol, coeff: Optional[EvenTracePoly] = None) -> "OddTraceLinear":
        return cls({symbol: coeff if coeff is not None else EvenTracePoly.one()})

    @property
    def items(self) -> Tuple[Tuple[TraceSymbol, EvenTracePoly], ...]:
        return self._items

    @property
    def is_zero(self) -> bool:
        return not self._items

    def symbols(self) -> Set[TraceSymbol]:
        found = {s for s, _ in self._items}
        for _, coeff in self._items:
            found.update(coeff.generators())
        return found

    def monomials(self) -> List[Monomial]:
        """Flattened: each monomial of a coefficient, followed by its odd trace."""
        return [(c, factors + ((s, 1),)) for s, coeff in self._items for c, factors in coeff.terms()]

    def __add__(self, other: "OddTraceLinear") -> "OddTraceLinear":
        if not isinstance(other, OddTraceLinear):
            return NotImplemented
        merged: Dict[TraceSymbol, EvenTracePoly] = dict(self._items)
        for symbol, coeff in other._items:
            merged[symbol] = merged.get(symbol, EvenTracePoly.zero()) + coeff
        return OddTraceLinear(merged)

    def __neg__(self) -> "OddTraceLinear":
        return OddTraceLinear({s: -c for s, c in self._items})

    def __sub__(self, other: "OddTraceLinear") -> "OddTraceLinear":
        if not isinstance(other, OddTraceLinear):
            return NotImplemented
        return self + (-other)

    def scale(self, factor: Union[EvenTracePoly, Rational]) -> "OddTraceLinear":
        if not isinstance(factor, EvenTracePoly):
            factor = EvenTracePoly.constant(factor)
        return OddTraceLinear({s: factor * c for s, c in self._items})

    def __mul__(self, factor: Any) -> "OddTraceLinear":
        if isinstance(factor, (EvenTracePoly, int, Fraction)) and not isinstance(factor, bool):
            return self.scale(factor)
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OddTraceLinear):
            return NotImplemented
        return self._items == other._items

    def __hash__(self) -> int:
        return hash(self._items)

    def evaluate(self, values: Mapping[TraceSymbol, GrassmannElement], config: AlgebraConfig) -> GrassmannElement:
        return sum_elements(config, (coeff.evaluate(values, config) * values[s] for s, coeff in self._items))

    def to_json(self) -> Dict[str, Any]:
        return {
            "parity": "odd",
            "linear": [{"symbol": s.to_json(), "coefficient": c.to_json()} for s, c in self._items],
        }

    def to_sexpr(self) -> str:
        lins = [f"(lin {s.to_sexpr()} {c.to_sexpr()})" for s, c in self._items]
        return "(" + " ".join(["odd", *lins]) + ")"

    def __repr__(self) -> str:
        return "OddTraceLinear(" + ", ".join(f"{s.name}: {c.expr}" for s, c in self._items) + ")"


Coefficient = Union[EvenTracePoly, OddTraceLinear]


def _coefficient_symbols(coeff: Coefficient) -> Set[TraceSymbol]:
    if isinstance(coeff, OddTraceLinear):
        return coeff.symbols()
    return set(coeff.generators())


def _coefficient_monomials(coeff: Coefficient) -> List[Monomial]:
    if isinstance(coeff, OddTraceLinear):
        return coeff.monomials()
    return coeff.terms()


# ---------------------------------------------------------------- identities


class SymbolicTheorem(str, Enum):
    THM21 = "thm21"
    THM23 = "thm23"


class PatternKind(str, Enum):
    IDENTITY = "identity"
    POWER = "power"
    WORD_SUM = "word_sum"


@dataclass(frozen=True)
class PowerPattern:
    """I, a pure power A^k / B^k, or the word sum A^{k-1}B + ... + BA^{k-1}."""

    kind: PatternKind
    base: Optional[str] = None
    exponent: int = 0

    def latex(self, n: int) -> str:
        if self.kind is PatternKind.IDENTITY:
            return f"I_{{{n}}}"
        if self.kind is PatternKind.POWER:
            return _power_latex(self.base, self.exponent)
        k = self.exponent
        return "+".join(_power_latex("A", k - 1 - j) + "B" + _power_latex("A", j) for j in range(k))

    @property
    def is_sum(self) -> bool:
        return self.kind is PatternKind.WORD_SUM and self.exponent > 1

    def to_json(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "base": self.base, "exponent": self.exponent}

    def to_sexpr(self) -> str:
        if self.kind is PatternKind.IDENTITY:
            return "(I)"
        if self.kind is PatternKind.POWER:
            return f"(pow {self.base} {self.exponent})"
        return f"(words {self.exponent})"


@dataclass(frozen=True)
class SymbolicTerm:
    pattern: PowerPattern
    coefficient: Coefficient


@dataclass(frozen=True)
class SymbolicCharData:
    """Symbolic (alpha_k, beta_k), or (gamma_k, delta_k) for thm23."""

    theorem: SymbolicTheorem
    n: int
    even: Tuple[EvenTracePoly, ...]
    odd: Tuple[OddTraceLinear, ...]

    def symbols(self) -> Set[TraceSymbol]:
        found: Set[TraceSymbol] = set()
        for coeff in (*self.even, *self.odd):
            found |= _coefficient_symbols(coeff)
        return found


@dataclass(frozen=True)
class SymbolicIdentity:
    theorem: SymbolicTheorem
    n: int
    terms: Tuple[SymbolicTerm, ...]
    data: Optional[SymbolicCharData] = field(default=None, compare=False, repr=False)

    def symbols(self) -> Set[TraceSymbol]:
        found: Set[TraceSymbol] = set()
        for term in self.terms:
            found |= _coefficient_symbols(term.coefficient)
        return found

    def max_power(self) -> int:
        return max(term.pattern.exponent for term in self.terms)


# ---------------------------------------------------------------- recursions


def _descending_fl(n: int, tr: Sequence[EvenTracePoly]) -> List[EvenTracePoly]:
    """lambda_n = 1, lambda_k = -1/(n-k) sum_i lambda_{k+i} tr_i with symbolic tr_i."""
    lam = [EvenTracePoly.zero() for _ in range(n + 1)]
    lam[n] = EvenTracePoly.one()
    for k in range(n - 1, -1, -1):
        m = n - k
        acc = EvenTracePoly.zero()
        for i in range(1, m + 1):
            acc = acc + lam[k + i] * tr[i]
        lam[k] = acc * Fraction(-1, m)
    return lam


def _descending_odd(
    n: int,
    even: Sequence[EvenTracePoly],
    tr: Sequence[EvenTracePoly],
    odd_trace: Callable[[int, int], TraceSymbol],
) -> List[OddTraceLinear]:
    # odd_trace(r, s) is the odd symbol paired with even[k + r + s + 1]
    out = [OddTraceLinear.zero() for _ in range(n + 1)]
    for k in range(n - 1, -1, -1):
        m = n - k
        acc = OddTraceLinear.zero()
        for i in range(1, m + 1):
            acc = acc + out[k + i].scale(tr[i])
        for r, s in mixed_pairs(m):
            acc = acc + OddTraceLinear.of(odd_trace(r, s), even[k + r + s + 1])
        out[k] = acc.scale(Fraction(-1, m))
    return out


def _check_n(n: int) -> None:
    if n < 1:
        raise ShapeError(f"identities are defined for n >= 1, got {n}")


def symbolic_theorem21_data(n: int) -> SymbolicCharData:
    _check_n(n)
    tr_a = [EvenTracePoly.zero()] + [EvenTracePoly.of(TraceSymbol.even_a(i)) for i in range(1, n + 1)]
    alpha = _descending_fl(n, tr_a)
    beta = _descending_odd(n, alpha, tr_a, TraceSymbol.mixed)
    return SymbolicCharData(SymbolicTheorem.THM21, n, tuple(alpha), tuple(beta))


def symbolic_theorem23_data(n: int) -> SymbolicCharData:
    _check_n(n)
    tr_b2 = [EvenTracePoly.zero()] + [EvenTracePoly.of(TraceSymbol.even_b2(i)) for i in range(1, n + 1)]
    gamma = _descending_fl(n, tr_b2)
    delta = _descending_odd(n, gamma, tr_b2, lambda r, s: TraceSymbol.odd_b(2 * r + 2 * s + 1))
    return SymbolicCharData(SymbolicTheorem.THM23, n, tuple(gamma), tuple(delta))


def _assemble(theorem: SymbolicTheorem, n: int, candidates: List[SymbolicTerm], data: SymbolicCharData) -> SymbolicIdentity:
    terms = tuple(t for t in candidates if not t.coefficient.is_zero)
    return SymbolicIdentity(theorem, n, terms, data)


def symbolic_theorem21(n: int) -> SymbolicIdentity:
    """beta_0 I + sum_k (beta_k A^k + alpha_k (A^{k-1}B + ... + BA^{k-1})), beta_n = 0."""
    data = symbolic_theorem21_data(n)
    candidates = [SymbolicTerm(PowerPattern(PatternKind.IDENTITY), data.odd[0])]
    for k in range(1, n + 1):
        if k < n:
            candidates.append(SymbolicTerm(PowerPattern(PatternKind.POWER, "A", k), data.odd[k]))
        candidates.append(SymbolicTerm(PowerPattern(PatternKind.WORD_SUM, None, k), data.even[k]))
    return _assemble(SymbolicTheorem.THM21, n, candidates, data)


def symbolic_theorem23(n: int) -> SymbolicIdentity:
    """delta_0 I + sum_k (k gamma_k B^{2k-1} + delta_k B^{2k}), delta_n = 0."""
    data = symbolic_theorem23_data(n)
    candidates = [SymbolicTerm(PowerPattern(PatternKind.IDENTITY), data.odd[0])]
    for k in range(1, n + 1):
        candidates.append(SymbolicTerm(PowerPattern(PatternKind.POWER, "B", 2 * k - 1), data.even[k] * k))
        if k < n:
            candidates.append(SymbolicTerm(PowerPattern(PatternKind.POWER, "B", 2 * k), data.odd[k]))
    return _assemble(SymbolicTheorem.THM23, n, candidates, data)


# ---------------------------------------------------------------- emit


class EmitFormat(str, Enum):
    LATEX = "latex"
    SEXPR = "sexpr"
    JSON = "json"


def _rational_latex(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return rf"\frac{{{value.numerator}}}{{{value.denominator}}}"


def _monomial_latex(magnitude: Fraction, factors: Tuple[Factor, ...]) -> str:
    body = "".join(s.latex(e) for s, e in factors)
    if magnitude == 1 and body:
        return body
    return _rational_latex(magnitude) + body


def _term_latex(term: SymbolicTerm, n: int) -> Tuple[str, str]:
    """(sign, body) of one summand."""
    monos = _coefficient_monomials(term.coefficient)
    pattern = term.pattern.latex(n)
    if len(monos) == 1:
        coeff, factors = monos[0]
        sign = "-" if coeff < 0 else "+"
        magnitude = abs(coeff)
        if magnitude == 1 and not factors:
            if term.pattern.is_sum and sign == "-":
                return sign, rf"\left({pattern}\right)"
            return sign, pattern
        prefix = _monomial_latex(magnitude, factors)
        if term.pattern.is_sum:
            pattern = rf"\left({pattern}\right)"
        return sign, prefix + pattern
    inner = ""
    for i, (coeff, factors) in enumerate(monos):
        if coeff < 0:
            inner += "-"
        elif i:
            inner += "+"
        inner += _monomial_latex(abs(coeff), factors)
    if term.pattern.is_sum:
        pattern = rf"\left({pattern}\right)"
    return "+", rf"\left({inner}\right)" + pattern


def to_latex(identity: SymbolicIdentity) -> str:
    out = ""
    for i, term in enumerate(identity.terms):
        sign, body = _term_latex(term, identity.n)
        if sign == "-" or i:
            out += sign
        out += body
    return (out or "0") + "=0"


def to_sexpr(identity: SymbolicIdentity) -> str:
    lines = [f"(identity {identity.theorem.value} {identity.n}"]
    for term in identity.terms:
        lines.append(f"  (term {term.pattern.to_sexpr()} {term.coefficient.to_sexpr()})")
    return "\n".join(lines) + ")"


def identity_to_json(identity: SymbolicIdentity) -> Dict[str, Any]:
    return {
        "theorem": identity.theorem.value,
        "n": identity.n,
        "terms": [{"pattern": t.pattern.to_json(), "coefficient": t.coefficient.to_json()} for t in identity.terms],
    }


def emit(identity: SymbolicIdentity, fmt: Union[str, EmitFormat]) -> str:
    try:
        fmt = EmitFormat(fmt)
    except ValueError as e:
        raise FormatError(f"unsupported format {fmt!r}; choose latex, sexpr or json") from e
    if fmt is EmitFormat.LATEX:
        return to_latex(identity)
    if fmt is EmitFormat.SEXPR:
        return to_sexpr(identity)
    return json.dumps(identity_to_json(identity), indent=2, sort_keys=True)


# ---------------------------------------------------------------- parse


def _even_from_json(data: Mapping[str, Any]) -> EvenTracePoly:
    try:
        return EvenTracePoly.from_terms(
            (
                Fraction(m["coeff"]),
                tuple((TraceSymbol.from_json(f["symbol"]), int(f["exp"])) for f in m["factors"]),
            )
            for m in data["monomials"]
        )
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
        raise FormatError(f"bad even coefficient {data!r}") from e


def _coefficient_from_json(data: Mapping[str, Any]) -> Coefficient:
    parity = data.get("parity") if isinstance(data, Mapping) else None
    if parity == "even":
        return _even_from_json(data)
    if parity == "odd":
        try:
            return OddTraceLinear(
                {TraceSymbol.from_json(i["symbol"]): _even_from_json(i["coefficient"]) for i in data["linear"]}
            )
        except (KeyError, TypeError) as e:
            raise FormatError(f"bad odd coefficient {data!r}") from e
    raise FormatError(f"coefficient parity must be 'even' or 'odd', got {parity!r}")


def parse_identity_json(source: Union[str, Mapping[str, Any]]) -> SymbolicIdentity:
    if isinstance(source, str):
        try:
            source = json.loads(source)
        except json.JSONDecodeError as e:
            raise FormatError(f"malformed identity JSON: {e}") from e
    try:
        theorem = SymbolicTheorem(source["theorem"])
        n = int(source["n"])
        terms = []
        for t in source["terms"]:
            p = t["pattern"]
            pattern = PowerPattern(PatternKind(p["kind"]), p.get("base"), int(p["exponent"]))
            terms.append(SymbolicTerm(pattern, _coefficient_from_json(t["coefficient"])))
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, FormatError):
            raise
        raise FormatError(f"malformed identity JSON: {e}") from e
    return SymbolicIdentity(theorem, n, tuple(terms))


_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def _read_sexpr(text: str) -> Any:
    stack: List[List[Any]] = [[]]
    for token in _TOKEN.findall(text):
        if token == "(":
            stack.append([])
        elif token == ")":
            if len(stack) == 1:
                raise FormatError("unbalanced ')' in S-expression")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(token)
    if len(stack) != 1 or len(stack[0]) != 1:
        raise FormatError("S-expression must be a single balanced form")
    return stack[0][0]


def _symbol_from_sexpr(form: List[Any]) -> TraceSymbol:
    try:
        return TraceSymbol(SymbolKind(form[0]), tuple(int(p) for p in form[1:]))
    except (IndexError, TypeError, ValueError) as e:
        if isinstance(e, FormatError):
            raise
        raise FormatError(f"bad trace symbol {form!r}") from e


def _even_from_sexpr(form: List[Any]) -> EvenTracePoly:
    if not form or form[0] != "even":
        raise FormatError(f"expected (even ...), got {form!r}")
    monomials = []
    for mono in form[1:]:
        if mono[0] != "mono":
            raise FormatError(f"expected (mono ...), got {mono!r}")
        factors = tuple((_symbol_from_sexpr(f[1]), int(f[2])) for f in mono[2:])
        monomials.append((Fraction(mono[1]), factors))
    return EvenTracePoly.from_terms(monomials)


def parse_identity_sexpr(text: str) -> SymbolicIdentity:
    form = _read_sexpr(text)
    try:
        if form[0] != "identity":
            raise FormatError(f"expected (identity ...), got {form[0]!r}")
        theorem, n = SymbolicTheorem(form[1]), int(form[2])
        terms = []
        for term in form[3:]:
            pattern_form, coeff_form = term[1], term[2]
            if pattern_form[0] == "I":
                pattern = PowerPattern(PatternKind.IDENTITY)
            elif pattern_form[0] == "pow":
                pattern = PowerPattern(PatternKind.POWER, pattern_form[1], int(pattern_form[2]))
            else:
                pattern = PowerPattern(PatternKind.WORD_SUM, None, int(pattern_form[1]))
            if coeff_form[0] == "odd":
                coeff: Coefficient = OddTraceLinear(
                    {_symbol_from_sexpr(lin[1]): _even_from_sexpr(lin[2]) for lin in coeff_form[1:]}
                )
            else:
                coeff = _even_from_sexpr(coeff_form)
            terms.append(SymbolicTerm(pattern, coeff))
    except (IndexError, TypeError, ValueError) as e:
        if isinstance(e, FormatError):
            raise
        raise FormatError(f"malformed identity S-expression: {e}") from e
    return SymbolicIdentity(theorem, n, tuple(terms))


# ---------------------------------------------------------------- substitution


def _trace_values(
    symbols: Iterable[TraceSymbol], a_powers: Sequence[MatrixE], b: MatrixE, b_powers: Sequence[MatrixE]
) -> Dict[TraceSymbol, GrassmannElement]:
    values = {}
    for s in symbols:
        if s.kind is SymbolKind.EVEN_A:
            values[s] = trace(a_powers[s.params[0]])
        elif s.kind is SymbolKind.MIXED_ODD:
            r, t = s.params
            values[s] = trace(a_powers[r] @ b @ a_powers[t])
        elif s.kind is SymbolKind.EVEN_B2:
            values[s] = trace(b_powers[2 * s.params[0]])
        else:
            values[s] = trace(b_powers[s.params[0]])
    return values


def _bind(
    theorem: SymbolicTheorem, n: int, symbols: Set[TraceSymbol], a: Optional[MatrixE], b: MatrixE
) -> Tuple[List[MatrixE], List[MatrixE], Dict[TraceSymbol, GrassmannElement]]:
    if b.n != n:
        raise ShapeError(f"identity for n = {n} applied to a {b.n} x {b.n} matrix")
    if theorem is SymbolicTheorem.THM21:
        if a is None:
            raise ShapeError("the thm21 identity needs both A and B")
        require_pair(a, b)
        a_powers = mat_powers(a, n)
        b_powers = [identity_matrix(n, b.config), b]
    else:
        require_odd(b)
        a_powers = []
        b_powers = mat_powers(b, 2 * n)
    return a_powers, b_powers, _trace_values(symbols, a_powers, b, b_powers)


def substitute(identity: SymbolicIdentity, a: Optional[MatrixE], b: MatrixE) -> MatrixE:
    """
    Replace every trace symbol and power pattern by its concrete value.

    ``a`` is ignored for thm23 identities. The result is the zero matrix
    whenever the identity holds.
    """
    a_powers, b_powers, values = _bind(identity.theorem, identity.n, identity.symbols(), a, b)
    config = b.config
    total = zero_matrix(identity.n, config)
    for term in identity.terms:
        p = term.pattern
        if p.kind is PatternKind.IDENTITY:
            word = identity_matrix(identity.n, config)
        elif p.kind is PatternKind.WORD_SUM:
            word = word_sum(a_powers, b, p.exponent)
        elif p.base == "A":
            word = a_powers[p.exponent]
        else:
            word = b_powers[p.exponent]
        total = total + word.scale(term.coefficient.evaluate(values, config))
    return total


def evaluate_data(data: SymbolicCharData, a: Optional[MatrixE], b: MatrixE) -> GradedCharData:
    """The evaluation homomorphism applied to every symbolic coefficient."""
    _, _, values = _bind(data.theorem, data.n, data.symbols(), a, b)
    config = b.config
    return GradedCharData(
        data.n,
        tuple(c.evaluate(values, config) for c in data.even),
        tuple(c.evaluate(values, config) for c in data.odd),
    )


# ---------------------------------------------------------------- service


class TraceSymbolicService(LoggerMixin):
    """Generate, render, read back and check symbolic identities."""

    def generate(self, theorem: Union[str, SymbolicTheorem], n: int) -> SymbolicIdentity:
        try:
            theorem = _theorem(theorem)
            build = symbolic_theorem21 if theorem is SymbolicTheorem.THM21 else symbolic_theorem23
            identity = build(n)
            self.logger.info(f"Generated symbolic {theorem.value} identity for n={n} with {len(identity.terms)} terms")
            return identity
        except AlgebraError as e:
            self.logger.error(f"Error generating symbolic identity: {str(e)}")
            raise

    def render(self, theorem: Union[str, SymbolicTheorem], n: int, fmt: Union[str, EmitFormat]) -> str:
        identity = self.generate(theorem, n)
        try:
            return emit(identity, fmt)
        except AlgebraError as e:
            self.logger.error(f"Error rendering symbolic identity: {str(e)}")
            raise

    def parse(self, text: str) -> SymbolicIdentity:
        """JSON when the text opens with '{', the S-expression form otherwise."""
        try:
            stripped = text.lstrip()
            if stripped.startswith("{"):
                return parse_identity_json(stripped)
            return parse_identity_sexpr(stripped)
        except AlgebraError as e:
            self.logger.error(f"Error reading symbolic identity: {str(e)}")
            raise

    def check(self, identity: SymbolicIdentity, a: Optional[MatrixE], b: MatrixE) -> MatrixE:
        """Substitute concrete matrices; a nonzero result raises IdentityViolationError."""
        try:
            residual = substitute(identity, a, b)
            if not residual.is_zero():
                row, column, element = residual.nonzero_entries()[0]
                raise IdentityViolationError(
                    f"{identity.theorem.value} n={identity.n} is nonzero at ({row}, {column}): {element}"
                )
            self.logger.debug(f"Symbolic {identity.theorem.value} n={identity.n} vanished on concrete matrices")
            return residual
        except AlgebraError as e:
            self.logger.error(f"Error checking symbolic identity: {str(e)}")
            raise


def _theorem(value: Union[str, SymbolicTheorem]) -> SymbolicTheorem:
    try:
        return SymbolicTheorem(value)
    except ValueError as e:
        raise FormatError(f"unknown symbolic identity {value!r}; choose thm21 or thm23") from e

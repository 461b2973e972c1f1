"""
Z2-graded Cayley-Hamilton trace identities for A in M_n(E_0), B in M_n(E_1).

Two routes compute the graded characteristic data (alpha_k, beta_k):
the direct trace recursions, and Faddeev-LeVerrier on the companion
matrix A + wB in M_n(F_0) followed by lambda_k = alpha_k + w beta_k.
"Companion matrix" means A + wB here, not the companion matrix of a
polynomial.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from src.algebra.grassmann import AlgebraConfig, Context, GrassmannElement, sum_elements
from src.algebra.supermatrix import (
    MatrixE,
    identity_matrix,
    mat_powers,
    scalar_matrix,
    trace,
    trace_of_product,
    zero_matrix,
)
from src.core.errors import AlgebraError, IdentityViolationError, ParityError, ShapeError, UnsupportedSizeError
from src.core.logging_config import LoggerMixin
from src.services.charpoly_service import CharPoly, eval_poly, faddeev_leverrier


@dataclass(frozen=True)
class GradedCharData:
    """
    alpha_0..alpha_n (even) and beta_0..beta_n (odd) with alpha_n = 1, beta_n = 0.

    The single-odd-matrix specialization (gamma_k, delta_k) uses the same type.
    """

    n: int
    alpha: Tuple[GrassmannElement, ...]
    beta: Tuple[GrassmannElement, ...]

    def __post_init__(self) -> None:
        if len(self.alpha) != self.n + 1 or len(self.beta) != self.n + 1:
            raise ShapeError(f"expected {self.n + 1} coefficients per list")
        if self.alpha[self.n] != 1 or not self.beta[self.n].is_zero:
            raise ShapeError("alpha_n must be 1 and beta_n must be 0")
        if not all(a.parity().is_even_like for a in self.alpha):
            raise ParityError("every alpha_k must be even")
        if not all(b.parity().is_odd_like for b in self.beta):
            raise ParityError("every beta_k must be odd")

    @property
    def gamma(self) -> Tuple[GrassmannElement, ...]:
        return self.alpha

    @property
    def delta(self) -> Tuple[GrassmannElement, ...]:
        return self.beta

    def to_json(self) -> Dict[str, object]:
        return {
            "n": self.n,
            "alpha": [a.to_json() for a in self.alpha],
            "beta": [b.to_json() for b in self.beta],
        }


@dataclass(frozen=True)
class IdentityTerm:
    """One summand ``coefficient * word`` of an identity left-hand side."""

    label: str
    power: int
    coefficient: GrassmannElement
    word: MatrixE
    value: MatrixE = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", self.word.scale(self.coefficient))

    @property
    def is_nonzero(self) -> bool:
        return not self.value.is_zero()


def sum_terms(terms: Sequence[IdentityTerm], n: int, config: AlgebraConfig) -> MatrixE:
    total = zero_matrix(n, config)
    for term in terms:
        total = total + term.value
    return total


# ---------------------------------------------------------------- validation


def require_odd(b: MatrixE) -> int:
    if b.config.context is not Context.E:
        raise ParityError("B must be a matrix over E")
    if not b.parity().is_odd_like:
        raise ParityError(f"B must be odd, got {b.parity().value}")
    return b.n


def require_pair(a: MatrixE, b: MatrixE) -> int:
    """Check A even, B odd, same size and config over E; return n."""
    if a.n != b.n:
        raise ShapeError(f"A is {a.n} x {a.n} but B is {b.n} x {b.n}")
    if a.config != b.config or a.config.context is not Context.E:
        raise ParityError("A and B must share one E configuration")
    if not a.parity().is_even_like:
        raise ParityError(f"A must be even, got {a.parity().value}")
    require_odd(b)
    return a.n


# ---------------------------------------------------------------- companion


def companion(a: MatrixE, b: MatrixE) -> MatrixE:
    """A + wB in M_n(F_0)."""
    require_pair(a, b)
    f_a = a.embed()
    w = GrassmannElement.w(a.config)
    return f_a + b.embed().scale(w)


def word_sum(a_powers: Sequence[MatrixE], b: MatrixE, k: int) -> MatrixE:
    """A^{k-1}B + A^{k-2}BA + ... + BA^{k-1}; ``a_powers[i]`` is A^i."""
    total = zero_matrix(b.n, b.config)
    for j in range(k):
        total = total + a_powers[k - 1 - j] @ b @ a_powers[j]
    return total


def expand_companion_power(a: MatrixE, b: MatrixE, i: int) -> Tuple[MatrixE, MatrixE]:
    """(A^i, sum_j A^{i-1-j} B A^j), so that (A+wB)^i = A^i + w * (second part)."""
    require_pair(a, b)
    if i < 1:
        raise ShapeError("companion power expansion needs i >= 1")
    powers = mat_powers(a, i)
    return powers[i], word_sum(powers, b, i)


def companion_trace_split(a: MatrixE, b: MatrixE, i: int) -> Tuple[GrassmannElement, GrassmannElement]:
    """tr((A+wB)^i) = tr(A^i) + w * sum_j tr(A^{i-1-j} B A^j), returned as the pair."""
    even_part, odd_part = expand_companion_power(a, b, i)
    return trace(even_part), trace(odd_part)


# ---------------------------------------------------------------- pair identity


def mixed_pairs(m: int) -> List[Tuple[int, int]]:
    """(r, s) with r, s >= 0 and r + s <= m - 1, in lexicographic order."""
    return [(r, s) for r in range(m) for s in range(m - r)]


def theorem21_data(a: MatrixE, b: MatrixE, *, a_powers: Optional[Sequence[MatrixE]] = None) -> GradedCharData:
    """
    alpha from Faddeev-LeVerrier on A, beta from

        beta_k = -1/(n-k) sum_i beta_{k+i} tr(A^i)
                 -1/(n-k) sum_{r+s <= n-k-1} alpha_{k+r+s+1} tr(A^r B A^s).

    ``a_powers`` may supply precomputed A^0..A^{n-1}; A^n is never formed.
    """
    n = require_pair(a, b)
    config = a.config
    if a_powers is None:
        a_powers = mat_powers(a, n - 1)
    elif len(a_powers) < n:
        raise ShapeError(f"need A^i for i <= {n - 1}, got {len(a_powers)} powers")
    tr_a = [trace(a_powers[i]) for i in range(n)]
    tr_a.append(trace_of_product(a_powers[n - 1], a))
    b_right = [b @ a_powers[s] for s in range(n)]
    mixed = {(r, s): trace_of_product(a_powers[r], b_right[s]) for r, s in mixed_pairs(n)}

    alpha = list(faddeev_leverrier(a, traces=tr_a).coeffs)
    beta: List[GrassmannElement] = [GrassmannElement.zero(config)] * (n + 1)
    for k in range(n - 1, -1, -1):
        m = n - k
        pure = (beta[k + i] * tr_a[i] for i in range(1, m + 1))
        cross = (alpha[k + r + s + 1] * mixed[(r, s)] for r, s in mixed_pairs(m))
        beta[k] = sum_elements(config, [*pure, *cross]).scale(Fraction(-1, m))
    return GradedCharData(n, tuple(alpha), tuple(beta))


def theorem21_data_via_companion(a: MatrixE, b: MatrixE) -> GradedCharData:
    """Faddeev-LeVerrier on A + wB, then split each lambda_k = alpha_k + w beta_k."""
    n = require_pair(a, b)
    lam = faddeev_leverrier(companion(a, b)).coeffs
    split = [value.decompose_w() for value in lam]
    return GradedCharData(n, tuple(s[0] for s in split), tuple(s[1] for s in split))


def theorem21_terms(
    a: MatrixE,
    b: MatrixE,
    data: Optional[GradedCharData] = None,
    *,
    a_powers: Optional[Sequence[MatrixE]] = None,
) -> List[IdentityTerm]:
    """beta_0 I, then per k: beta_k A^k and alpha_k (A^{k-1}B + ... + BA^{k-1})."""
    n = require_pair(a, b)
    if a_powers is None:
        a_powers = mat_powers(a, n - 1)
    elif len(a_powers) < n:
        raise ShapeError(f"need A^i for i <= {n - 1}, got {len(a_powers)} powers")
    data = data if data is not None else theorem21_data(a, b, a_powers=a_powers)
    terms = [IdentityTerm("beta_0*I", 0, data.beta[0], a_powers[0])]
    for k in range(1, n + 1):
        if k < n:
            terms.append(IdentityTerm(f"beta_{k}*A^{k}", k, data.beta[k], a_powers[k]))
        terms.append(IdentityTerm(f"alpha_{k}*W_{k}", k, data.alpha[k], word_sum(a_powers, b, k)))
    return terms


def theorem21_lhs(a: MatrixE, b: MatrixE) -> MatrixE:
    terms = theorem21_terms(a, b)
    return sum_terms(terms, a.n, a.config)


# ---------------------------------------------------------------- single odd matrix


@dataclass(frozen=True)
class OddPowers:
    """B^0 .. B^{2n-1} and their traces, shared by the single-odd-matrix routines."""

    powers: List[MatrixE]
    traces: List[GrassmannElement]

    @property
    def square(self) -> MatrixE:
        return self.powers[2] if len(self.powers) > 2 else self.powers[1] @ self.powers[1]

    @property
    def square_powers(self) -> List[MatrixE]:
        """(B^2)^0 .. (B^2)^{n-1}."""
        return self.powers[0::2]


def odd_powers(b: MatrixE) -> OddPowers:
    require_odd(b)
    powers = mat_powers(b, 2 * b.n - 1)
    return OddPowers(powers, [trace(p) for p in powers])


def _checked_powers(b: MatrixE, powers: Optional[OddPowers]) -> OddPowers:
    if powers is None:
        return odd_powers(b)
    if len(powers.powers) != 2 * b.n:
        raise ShapeError(f"need B^i for i <= {2 * b.n - 1}, got {len(powers.powers)} powers")
    return powers


def theorem23_data(b: MatrixE, *, powers: Optional[OddPowers] = None) -> GradedCharData:
    """
    gamma from Faddeev-LeVerrier on B^2 and

        delta_k = -1/(n-k) sum_i delta_{k+i} tr(B^{2i})
                  -1/(n-k) sum_{r+s <= n-k-1} gamma_{k+r+s+1} tr(B^{2r+2s+1}).
    """
    n = require_odd(b)
    config = b.config
    cache = _checked_powers(b, powers)
    # tr(B^{2i}) for i = 0..n; B^{2n} itself is never formed
    tr_even = [cache.traces[2 * i] for i in range(n)]
    tr_even.append(trace_of_product(cache.powers[n], cache.powers[n]))
    gamma = list(faddeev_leverrier(cache.square, traces=tr_even).coeffs)
    delta: List[GrassmannElement] = [GrassmannElement.zero(config)] * (n + 1)
    for k in range(n - 1, -1, -1):
        m = n - k
        pure = (delta[k + i] * tr_even[i] for i in range(1, m + 1))
        cross = (gamma[k + r + s + 1] * cache.traces[2 * r + 2 * s + 1] for r, s in mixed_pairs(m))
        delta[k] = sum_elements(config, [*pure, *cross]).scale(Fraction(-1, m))
    return GradedCharData(n, tuple(gamma), tuple(delta))


def theorem23_terms(
    b: MatrixE, data: Optional[GradedCharData] = None, *, powers: Optional[OddPowers] = None
) -> List[IdentityTerm]:
    """delta_0 I, then per k: k gamma_k B^{2k-1} and delta_k B^{2k} (delta_n = 0 is omitted)."""
    n = require_odd(b)
    cache = _checked_powers(b, powers)
    data = data if data is not None else theorem23_data(b, powers=cache)
    terms = [IdentityTerm("delta_0*I", 0, data.delta[0], cache.powers[0])]
    for k in range(1, n + 1):
        terms.append(
            IdentityTerm(f"{k}*gamma_{k}*B^{2 * k - 1}", 2 * k - 1, data.gamma[k].scale(k), cache.powers[2 * k - 1])
        )
        if k < n:
            terms.append(IdentityTerm(f"delta_{k}*B^{2 * k}", 2 * k, data.delta[k], cache.powers[2 * k]))
    return terms


def theorem23_lhs(b: MatrixE) -> MatrixE:
    return sum_terms(theorem23_terms(b), b.n, b.config)


def leading_term_check(terms: Sequence[IdentityTerm], n: int) -> bool:
    """The highest-power summand is n * B^{2n-1}: degree 2n-1, leading coefficient n."""
    top = max(term.power for term in terms)
    leaders = [term for term in terms if term.power == top]
    return top == 2 * n - 1 and len(leaders) == 1 and leaders[0].coefficient == n


def classical_square_identity(b: MatrixE) -> Tuple[CharPoly, MatrixE]:
    """p_{B^2}(B^2): the monic degree-2n identity from Cayley-Hamilton applied to B^2."""
    require_odd(b)
    b2 = b @ b
    p = faddeev_leverrier(b2)
    return p, eval_poly(p, b2)


# ---------------------------------------------------------------- corollaries


def corollary22_terms(a: MatrixE, b: MatrixE) -> List[IdentityTerm]:
    """The n = 2 closed form, evaluated directly from traces."""
    n = require_pair(a, b)
    if n != 2:
        raise UnsupportedSizeError("the n = 2 closed form needs 2 x 2 matrices")
    half = Fraction(1, 2)
    ab, ba = a @ b, b @ a
    tr_a, tr_b, tr_ab, tr_ba = trace(a), trace(b), trace(ab), trace(ba)
    scalar = (tr_b * tr_a).scale(half) + (tr_a * tr_b).scale(half) - tr_ab.scale(half) - tr_ba.scale(half)
    one = GrassmannElement.one(a.config)
    return [
        IdentityTerm("scalar*I", 0, scalar, identity_matrix(2, a.config)),
        IdentityTerm("-tr(B)*A", 1, -tr_b, a),
        IdentityTerm("-tr(A)*B", 1, -tr_a, b),
        IdentityTerm("AB", 2, one, ab),
        IdentityTerm("BA", 2, one, ba),
    ]


def corollary22_lhs(a: MatrixE, b: MatrixE) -> MatrixE:
    return sum_terms(corollary22_terms(a, b), 2, a.config)


def corollary27_terms(b: MatrixE, n: Optional[int] = None) -> List[IdentityTerm]:
    """Closed forms of the degree 2n-1 identity for n = 2 and n = 3."""
    size = require_odd(b)
    n = size if n is None else n
    if n != size:
        raise ShapeError(f"closed form for n = {n} applied to a {size} x {size} matrix")
    if n not in (2, 3):
        raise UnsupportedSizeError(f"closed forms exist for n = 2 and n = 3, not n = {n}")
    half = Fraction(1, 2)
    powers = mat_powers(b, 2 * n - 1)
    t = [trace(p) for p in powers]
    one = GrassmannElement.one(b.config)
    if n == 2:
        return [
            IdentityTerm("(tr(B)tr(B^2)-tr(B^3))*I", 0, t[1] * t[2] - t[3], powers[0]),
            IdentityTerm("-tr(B^2)*B", 1, -t[2], powers[1]),
            IdentityTerm("-tr(B)*B^2", 2, -t[1], powers[2]),
            IdentityTerm("2*B^3", 3, one.scale(2), powers[3]),
        ]
    scalar = (t[2] * t[2] * t[1]).scale(-half) + t[3] * t[2] + (t[4] * t[1]).scale(half) - t[5]
    return [
        IdentityTerm("scalar*I", 0, scalar, powers[0]),
        IdentityTerm("(tr^2(B^2)-tr(B^4))/2*B", 1, (t[2] * t[2]).scale(half) - t[4].scale(half), powers[1]),
        IdentityTerm("(tr(B^2)tr(B)-tr(B^3))*B^2", 2, t[2] * t[1] - t[3], powers[2]),
        IdentityTerm("-2tr(B^2)*B^3", 3, t[2].scale(-2), powers[3]),
        IdentityTerm("-tr(B)*B^4", 4, -t[1], powers[4]),
        IdentityTerm("3*B^5", 5, one.scale(3), powers[5]),
    ]


def corollary27_lhs(b: MatrixE, n: Optional[int] = None) -> MatrixE:
    return sum_terms(corollary27_terms(b, n), b.n, b.config)


@dataclass(frozen=True)
class Corollary25Verdict:
    """
    Outcome of the vanishing-trace corollary on one odd matrix.

    When tr(B^t) = 0 for 1 <= t <= 2n-2, n B^{2n-1} must equal
    tr(B^{2n-1}) I, and tr(B^{2n-1}) = 0 must force B^{2n-1} = 0.
    """

    n: int
    hypothesis_satisfied: bool
    failing_power: Optional[int] = None
    top_trace: Optional[GrassmannElement] = None
    top_power: Optional[MatrixE] = None
    residual: Optional[MatrixE] = None

    @property
    def conclusion_holds(self) -> Optional[bool]:
        if not self.hypothesis_satisfied:
            return None
        return self.residual.is_zero()

    @property
    def stronger_conclusion_applies(self) -> bool:
        return self.hypothesis_satisfied and self.top_trace.is_zero

    @property
    def top_power_vanishes(self) -> Optional[bool]:
        if not self.hypothesis_satisfied:
            return None
        return self.top_power.is_zero()

    @property
    def violations(self) -> List[str]:
        if not self.hypothesis_satisfied:
            return []
        found = []
        if not self.conclusion_holds:
            found.append("n*B^(2n-1) != tr(B^(2n-1))*I")
        if self.stronger_conclusion_applies and not self.top_power_vanishes:
            found.append("tr(B^(2n-1)) = 0 but B^(2n-1) != 0")
        return found

    def raise_for_violation(self) -> None:
        if self.violations:
            raise IdentityViolationError("; ".join(self.violations))

    def summary(self) -> str:
        if not self.hypothesis_satisfied:
            return f"hypothesis not satisfied (tr(B^{self.failing_power}) != 0)"
        if self.violations:
            return "violated: " + "; ".join(self.violations)
        if self.stronger_conclusion_applies:
            return "hypothesis satisfied; tr(B^(2n-1)) = 0 and B^(2n-1) = 0"
        return "hypothesis satisfied; n*B^(2n-1) = tr(B^(2n-1))*I is a nonzero scalar matrix"


def corollary25_check(b: MatrixE) -> Corollary25Verdict:
    n = require_odd(b)
    if n < 2:
        raise UnsupportedSizeError("the vanishing-trace corollary needs n >= 2")
    cache = odd_powers(b)
    for t in range(1, 2 * n - 1):
        if not cache.traces[t].is_zero:
            return Corollary25Verdict(n, False, failing_power=t)
    top = cache.powers[2 * n - 1]
    top_trace = cache.traces[2 * n - 1]
    residual = top.scale(n) - scalar_matrix(top_trace, n)
    return Corollary25Verdict(n, True, top_trace=top_trace, top_power=top, residual=residual)


def corollary25_terms(b: MatrixE) -> List[IdentityTerm]:
    """n B^{2n-1} and -tr(B^{2n-1}) I: the two summands of the residual."""
    n = require_odd(b)
    powers = mat_powers(b, 2 * n - 1)
    top_trace = trace(powers[2 * n - 1])
    one = GrassmannElement.one(b.config)
    return [
        IdentityTerm(f"{n}*B^{2 * n - 1}", 2 * n - 1, one.scale(n), powers[2 * n - 1]),
        IdentityTerm(f"-tr(B^{2 * n - 1})*I", 0, -top_trace, powers[0]),
    ]


# ---------------------------------------------------------------- service


class GradedIdentityService(LoggerMixin):
    """
    Characteristic data and identity residuals for concrete matrices.

    Wraps the functions above for callers that want failures logged; with
    ``cross_check`` the two independent routes must agree.
    """

    def pair_data(self, a: MatrixE, b: MatrixE, *, cross_check: bool = False) -> GradedCharData:
        try:
            data = theorem21_data(a, b)
            if cross_check and theorem21_data_via_companion(a, b) != data:
                raise IdentityViolationError("trace recursion and companion route give different (alpha, beta)")
            self.logger.debug(f"Graded characteristic data computed for n={data.n}")
            return data
        except AlgebraError as e:
            self.logger.error(f"Error computing graded characteristic data: {str(e)}")
            raise

    def odd_data(self, b: MatrixE, *, cross_check: bool = False) -> GradedCharData:
        try:
            powers = odd_powers(b)
            data = theorem23_data(b, powers=powers)
            if cross_check and theorem21_data(powers.square, b, a_powers=powers.square_powers) != data:
                raise IdentityViolationError("(gamma, delta) differ from the pair data at A = B^2")
            self.logger.debug(f"Odd characteristic data computed for n={data.n}")
            return data
        except AlgebraError as e:
            self.logger.error(f"Error computing odd characteristic data: {str(e)}")
            raise

    def pair_residual(self, a: MatrixE, b: MatrixE) -> MatrixE:
        try:
            return theorem21_lhs(a, b)
        except AlgebraError as e:
            self.logger.error(f"Error evaluating the pair identity: {str(e)}")
            raise

    def odd_residual(self, b: MatrixE) -> MatrixE:
        try:
            return theorem23_lhs(b)
        except AlgebraError as e:
            self.logger.error(f"Error evaluating the odd identity: {str(e)}")
            raise

    def vanishing_trace_check(self, b: MatrixE) -> Corollary25Verdict:
        try:
            verdict = corollary25_check(b)
            self.logger.info(f"Vanishing-trace check on n={verdict.n}: {verdict.summary()}")
            return verdict
        except AlgebraError as e:
            self.logger.error(f"Error in vanishing-trace check: {str(e)}")
            raise

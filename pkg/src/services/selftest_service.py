"""
Golden closed forms and hand-checked examples, runnable without pytest.
"""

from fractions import Fraction
from typing import Callable, List, Optional, Tuple

from src.algebra.grassmann import AlgebraConfig, GrassmannElement
from src.algebra.supermatrix import MatrixE, diag, identity_matrix, mat_pow, scalar_matrix, trace
from src.core.errors import AlgebraError, UnsupportedSizeError
from src.core.logging_config import LoggerMixin
from src.schemas.trial_schemas import CheckResult, SelfTestReport
from src.services.charpoly_service import charpoly_oracle, faddeev_leverrier
from src.services.graded_identity_service import corollary25_check, theorem21_data, theorem21_lhs, theorem23_lhs
from src.services.trace_symbolic_service import (
    EvenTracePoly,
    OddTraceLinear,
    PatternKind,
    PowerPattern,
    SymbolicIdentity,
    SymbolicTerm,
    SymbolicTheorem,
    TraceSymbol,
    emit,
    substitute,
    symbolic_theorem21,
    symbolic_theorem23,
)

CheckFn = Callable[[], Tuple[bool, Optional[str]]]

HALF = Fraction(1, 2)
N1_THM23_LATEX = r"-\mathrm{tr}(B)I_{1}+B=0"


def _even(symbol: TraceSymbol) -> EvenTracePoly:
    return EvenTracePoly.of(symbol)


def _identity(pattern_coeffs: List[Tuple[PowerPattern, object]], theorem: SymbolicTheorem, n: int) -> SymbolicIdentity:
    return SymbolicIdentity(theorem, n, tuple(SymbolicTerm(p, c) for p, c in pattern_coeffs))


def golden_corollary22() -> SymbolicIdentity:
    """The n = 2 golden identity with (1/2)tr(B)tr(A) + (1/2)tr(A)tr(B) merged to tr(A)tr(B)."""
    tr_a = _even(TraceSymbol.even_a(1))
    tr_b, tr_ba, tr_ab = TraceSymbol.mixed(0, 0), TraceSymbol.mixed(0, 1), TraceSymbol.mixed(1, 0)
    scalar = OddTraceLinear(
        {tr_b: tr_a, tr_ab: EvenTracePoly.constant(-HALF), tr_ba: EvenTracePoly.constant(-HALF)}
    )
    return _identity(
        [
            (PowerPattern(PatternKind.IDENTITY), scalar),
            (PowerPattern(PatternKind.POWER, "A", 1), -OddTraceLinear.of(tr_b)),
            (PowerPattern(PatternKind.WORD_SUM, None, 1), -tr_a),
            (PowerPattern(PatternKind.WORD_SUM, None, 2), EvenTracePoly.one()),
        ],
        SymbolicTheorem.THM21,
        2,
    )


def golden_corollary27(n: int) -> SymbolicIdentity:
    """Golden degree 2n-1 identities for n = 2 and n = 3."""
    t1, t2 = _even(TraceSymbol.even_b2(1)), _even(TraceSymbol.even_b2(2))
    o1, o3, o5 = TraceSymbol.odd_b(1), TraceSymbol.odd_b(3), TraceSymbol.odd_b(5)
    minus_one = EvenTracePoly.constant(-1)

    def power(k: int) -> PowerPattern:
        return PowerPattern(PatternKind.POWER, "B", k)

    if n == 2:
        return _identity(
            [
                (PowerPattern(PatternKind.IDENTITY), OddTraceLinear({o1: t1, o3: minus_one})),
                (power(1), -t1),
                (power(2), -OddTraceLinear.of(o1)),
                (power(3), EvenTracePoly.constant(2)),
            ],
            SymbolicTheorem.THM23,
            2,
        )
    if n == 3:
        return _identity(
            [
                (
                    PowerPattern(PatternKind.IDENTITY),
                    OddTraceLinear({o1: t1 * t1 * (-HALF) + t2 * HALF, o3: t1, o5: minus_one}),
                ),
                (power(1), t1 * t1 * HALF - t2 * HALF),
                (power(2), OddTraceLinear({o1: t1, o3: minus_one})),
                (power(3), t1 * (-2)),
                (power(4), -OddTraceLinear.of(o1)),
                (power(5), EvenTracePoly.constant(3)),
            ],
            SymbolicTheorem.THM23,
            3,
        )
    raise UnsupportedSizeError(f"no golden closed form for n = {n}")


def cor25_witness_matrix() -> MatrixE:
    """[[v1, v2], [v3, -v1]]."""
    return MatrixE(AlgebraConfig(3), [["v1", "v2"], ["v3", "-v1"]])


def hand_oracle_pair() -> Tuple[MatrixE, MatrixE]:
    """A = diag(1, 0), B = [[0, v1], [v2, 0]]."""
    config = AlgebraConfig(2)
    return diag(config, [1, 0]), MatrixE(config, [[0, "v1"], ["v2", 0]])


# ---------------------------------------------------------------- checks


def _check_golden_cor22() -> Tuple[bool, Optional[str]]:
    return symbolic_theorem21(2) == golden_corollary22(), None


def _check_golden_cor27() -> Tuple[bool, Optional[str]]:
    bad = [n for n in (2, 3) if symbolic_theorem23(n) != golden_corollary27(n)]
    return not bad, f"mismatch for n = {bad}" if bad else None


def _check_latex_n1() -> Tuple[bool, Optional[str]]:
    text = emit(symbolic_theorem23(1), "latex")
    return text == N1_THM23_LATEX, text


def _check_leading_terms() -> Tuple[bool, Optional[str]]:
    for n in range(1, 5):
        identity = symbolic_theorem23(n)
        top = [t for t in identity.terms if t.pattern.exponent == identity.max_power()]
        if identity.max_power() != 2 * n - 1 or len(top) != 1 or top[0].coefficient != EvenTracePoly.constant(n):
            return False, f"n = {n}"
    return True, None


def _check_cor25_witness() -> Tuple[bool, Optional[str]]:
    b = cor25_witness_matrix()
    config = b.config
    v123 = GrassmannElement.from_terms(config, [((1, 2, 3), 1)])
    b3 = mat_pow(b, 3)
    facts = {
        "tr(B) = 0": trace(b).is_zero,
        "tr(B^2) = 0": trace(mat_pow(b, 2)).is_zero,
        "B^3 = 3 v1v2v3 I": b3 == scalar_matrix(v123.scale(3), 2),
        "tr(B^3) = 6 v1v2v3": trace(b3) == v123.scale(6),
        "2 B^3 = tr(B^3) I": b3.scale(2) == scalar_matrix(trace(b3), 2),
    }
    verdict = corollary25_check(b)
    facts["corollary verdict"] = verdict.hypothesis_satisfied and verdict.conclusion_holds
    failed = [name for name, ok in facts.items() if not ok]
    return not failed, ", ".join(failed) or None


def _check_hand_pair() -> Tuple[bool, Optional[str]]:
    a, b = hand_oracle_pair()
    data = theorem21_data(a, b)
    ok = (
        data.alpha[1] == -1
        and data.alpha[0].is_zero
        and all(beta.is_zero for beta in data.beta)
        and theorem21_lhs(a, b).is_zero()
        and substitute(symbolic_theorem21(2), a, b).is_zero()
    )
    return ok, None


def _check_thm23_substitution() -> Tuple[bool, Optional[str]]:
    b = cor25_witness_matrix()
    return theorem23_lhs(b).is_zero() and substitute(symbolic_theorem23(2), None, b).is_zero(), None


def _check_charpoly_oracle() -> Tuple[bool, Optional[str]]:
    config = AlgebraConfig(4)
    h = diag(config, ["v1^v2", "v3^v4"])
    p = faddeev_leverrier(h)
    expected_l1 = GrassmannElement.from_terms(config, [((1, 2), -1), ((3, 4), -1)])
    expected_l0 = GrassmannElement.from_terms(config, [((1, 2, 3, 4), 1)])
    ok = p[1] == expected_l1 and p[0] == expected_l0 and p == charpoly_oracle(h)
    return ok, p.to_text()


def _check_identity_matrix_charpoly() -> Tuple[bool, Optional[str]]:
    p = faddeev_leverrier(identity_matrix(3, AlgebraConfig(1)))
    # (x - 1)^3
    return [c.scalar_part for c in p.coeffs] == [-1, 3, -3, 1], p.to_text()


CHECKS: List[Tuple[str, CheckFn]] = [
    ("golden_corollary22", _check_golden_cor22),
    ("golden_corollary27", _check_golden_cor27),
    ("latex_thm23_n1", _check_latex_n1),
    ("leading_term_structure", _check_leading_terms),
    ("corollary25_witness", _check_cor25_witness),
    ("hand_oracle_pair", _check_hand_pair),
    ("thm23_substitution", _check_thm23_substitution),
    ("charpoly_hand_oracle", _check_charpoly_oracle),
    ("charpoly_identity_matrix", _check_identity_matrix_charpoly),
]


class SelfTestService(LoggerMixin):
    def __init__(self, checks: Optional[List[Tuple[str, CheckFn]]] = None):
        self.checks = checks if checks is not None else CHECKS

    def run(self) -> SelfTestReport:
        self.logger.info(f"Running {len(self.checks)} self-test checks")
        results = []
        for name, check in self.checks:
            try:
                passed, detail = check()
            except AlgebraError as e:
                self.logger.error(f"Self-test {name} raised: {str(e)}")
                passed, detail = False, f"{type(e).__name__}: {e}"
            if not passed:
                self.logger.error(f"Self-test {name} failed")
            results.append(CheckResult(name=name, passed=passed, detail=None if passed else detail))
        return SelfTestReport(checks=results)

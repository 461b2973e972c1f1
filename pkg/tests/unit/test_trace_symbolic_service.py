from fractions import Fraction

import pytest

from src.algebra.supermatrix import MatrixE
from src.core.errors import FormatError, IdentityViolationError, ParityError, ShapeError
from src.core.logging_config import setup_logging
from src.services.graded_identity_service import theorem21_data, theorem23_data
from src.services.selftest_service import golden_corollary22, golden_corollary27
from src.services.trace_symbolic_service import (
    EvenTracePoly,
    OddTraceLinear,
    PatternKind,
    SymbolKind,
    SymbolicIdentity,
    SymbolicTheorem,
    TraceSymbol,
    TraceSymbolicService,
    emit,
    evaluate_data,
    identity_to_json,
    parse_identity_json,
    parse_identity_sexpr,
    substitute,
    symbolic_theorem21,
    symbolic_theorem21_data,
    symbolic_theorem23,
    symbolic_theorem23_data,
    to_latex,
    to_sexpr,
)

N2_THM23_LATEX = (
    r"\left(\mathrm{tr}(B^{2})\mathrm{tr}(B)-\mathrm{tr}(B^{3})\right)I_{2}"
    r"-\mathrm{tr}(B^{2})B-\mathrm{tr}(B)B^{2}+2B^{3}=0"
)


def test_trace_symbol_validation():
    with pytest.raises(FormatError):
        TraceSymbol.odd_b(2)
    with pytest.raises(FormatError):
        TraceSymbol.even_a(0)
    with pytest.raises(FormatError):
        TraceSymbol(SymbolKind.MIXED_ODD, (1,))
    assert TraceSymbol.mixed(0, 1) != TraceSymbol.mixed(1, 0)
    assert TraceSymbol.from_symbol(TraceSymbol.mixed(2, 0).symbol) == TraceSymbol.mixed(2, 0)


def test_trace_symbol_latex():
    assert TraceSymbol.mixed(1, 0).latex() == r"\mathrm{tr}(AB)"
    assert TraceSymbol.even_b2(1).latex(2) == r"\mathrm{tr}^{2}(B^{2})"
    assert TraceSymbol.odd_b(3).latex() == r"\mathrm{tr}(B^{3})"


def test_even_poly_rejects_odd_symbols():
    with pytest.raises(FormatError):
        EvenTracePoly.of(TraceSymbol.odd_b(1))
    with pytest.raises(FormatError):
        OddTraceLinear.of(TraceSymbol.even_a(1))


def test_odd_linear_arithmetic():
    t = EvenTracePoly.of(TraceSymbol.even_a(1))
    x = OddTraceLinear.of(TraceSymbol.mixed(0, 0), t)
    assert (x - x).is_zero
    assert x * 2 == x + x
    assert (x * t).items[0][1] == t * t


def test_golden_closed_forms():
    assert symbolic_theorem21(2) == golden_corollary22()
    assert symbolic_theorem23(2) == golden_corollary27(2)
    assert symbolic_theorem23(3) == golden_corollary27(3)


def test_n1_identities():
    assert to_latex(symbolic_theorem23(1)) == r"-\mathrm{tr}(B)I_{1}+B=0"
    identity = symbolic_theorem21(1)
    assert [t.pattern.kind for t in identity.terms] == [PatternKind.IDENTITY, PatternKind.WORD_SUM]


def test_n2_latex():
    assert emit(symbolic_theorem23(2), "latex") == N2_THM23_LATEX


def test_zero_terms_are_omitted():
    assert symbolic_theorem23(1).max_power() == 1
    for n in range(1, 4):
        assert all(not term.coefficient.is_zero for term in symbolic_theorem21(n).terms)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_leading_term(n):
    identity = symbolic_theorem23(n)
    top = [t for t in identity.terms if t.pattern.exponent == identity.max_power()]
    assert identity.max_power() == 2 * n - 1
    assert top[0].coefficient == n


def test_odd_symbols_appear_linearly():
    for n in range(1, 4):
        for data in (symbolic_theorem21_data(n), symbolic_theorem23_data(n)):
            assert all(isinstance(c, EvenTracePoly) for c in data.even)
            for odd in data.odd:
                assert all(not any(s.is_odd for s in coeff.generators()) for _, coeff in odd.items)


@pytest.mark.parametrize("theorem", [symbolic_theorem21, symbolic_theorem23])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_json_and_sexpr_parse_back(theorem, n):
    identity = theorem(n)
    assert parse_identity_json(emit(identity, "json")) == identity
    assert parse_identity_json(identity_to_json(identity)) == identity
    assert parse_identity_sexpr(to_sexpr(identity)) == identity


def test_sexpr_shape():
    text = to_sexpr(symbolic_theorem23(1))
    assert text.startswith("(identity thm23 1")
    assert "(term (I) (odd (lin (trB 1) (even (mono -1)))))" in text
    assert "(term (pow B 1) (even (mono 1)))" in text


def test_parse_errors():
    with pytest.raises(FormatError):
        parse_identity_sexpr("(identity thm23 1")
    with pytest.raises(FormatError):
        parse_identity_sexpr("(banana)")
    with pytest.raises(FormatError):
        parse_identity_json('{"theorem": "thm99", "n": 1, "terms": []}')
    with pytest.raises(FormatError):
        parse_identity_json("{")


def test_unknown_format_rejected():
    with pytest.raises(FormatError):
        emit(symbolic_theorem23(1), "markdown")


@pytest.mark.parametrize("n", [1, 2, 3])
def test_evaluation_matches_concrete_thm21(random_pair, n):
    a, b = random_pair(n, seed=n)
    assert evaluate_data(symbolic_theorem21_data(n), a, b) == theorem21_data(a, b)
    assert substitute(symbolic_theorem21(n), a, b).is_zero()


@pytest.mark.parametrize("n", [1, 2, 3])
def test_evaluation_matches_concrete_thm23(random_odd, n):
    b = random_odd(n, seed=n)
    assert evaluate_data(symbolic_theorem23_data(n), None, b) == theorem23_data(b)
    assert substitute(symbolic_theorem23(n), None, b).is_zero()


def test_substitute_hand_examples(hand_pair, cor25_witness):
    assert substitute(symbolic_theorem21(2), *hand_pair).is_zero()
    a, _ = hand_pair
    # a is ignored for thm23
    assert substitute(symbolic_theorem23(2), a, cor25_witness).is_zero()


def test_substitute_checks_inputs(hand_pair):
    a, b = hand_pair
    with pytest.raises(ShapeError):
        substitute(symbolic_theorem21(2), None, b)
    with pytest.raises(ShapeError):
        substitute(symbolic_theorem23(3), None, b)
    with pytest.raises(ParityError):
        substitute(symbolic_theorem23(2), None, a)


def test_delta0_is_homogeneous_in_b(random_odd):
    # delta_0 is homogeneous of degree 2n - 1 in the entries of B
    b = random_odd(2, seed=3)
    data = symbolic_theorem23_data(2)
    base = evaluate_data(data, None, b).delta[0]
    scaled = evaluate_data(data, None, b.scale(Fraction(2))).delta[0]
    assert scaled == base.scale(8)


def test_symbol_inventory():
    assert symbolic_theorem23(2).symbols() == {
        TraceSymbol.odd_b(1),
        TraceSymbol.odd_b(3),
        TraceSymbol.even_b2(1),
    }
    assert symbolic_theorem21_data(1).theorem is SymbolicTheorem.THM21


def test_service_render_and_parse():
    service = TraceSymbolicService()
    assert service.render("thm23", 2, "latex") == N2_THM23_LATEX
    identity = service.generate(SymbolicTheorem.THM21, 2)
    assert service.parse(emit(identity, "json")) == identity
    assert service.parse("\n" + emit(identity, "sexpr")) == identity


def test_service_check(hand_pair, cor25_witness, config4):
    service = TraceSymbolicService()
    assert service.check(service.generate("thm21", 2), *hand_pair).is_zero()
    assert service.check(service.generate("thm23", 2), None, cor25_witness).is_zero()
    full = service.generate("thm23", 1)
    without_scalar = SymbolicIdentity(full.theorem, 1, full.terms[1:])
    with pytest.raises(IdentityViolationError):
        service.check(without_scalar, None, MatrixE(config4, [["v1"]]))


def test_service_logs_generation(capsys, reset_structlog):
    setup_logging(log_level="INFO")
    TraceSymbolicService().generate("thm23", 2)
    assert "Generated symbolic thm23 identity for n=2" in capsys.readouterr().err


def test_service_logs_and_reraises(capsys, reset_structlog):
    setup_logging(log_level="ERROR")
    service = TraceSymbolicService()
    with pytest.raises(ShapeError):
        service.generate("thm21", 0)
    with pytest.raises(FormatError):
        service.generate("thm99", 1)
    with pytest.raises(FormatError):
        service.render("thm23", 1, "markdown")
    err = capsys.readouterr().err
    assert "Error generating symbolic identity" in err
    assert "Error rendering symbolic identity" in err

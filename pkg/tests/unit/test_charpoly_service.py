from fractions import Fraction
from itertools import permutations

import pytest
import sympy as sp

from src.algebra.grassmann import AlgebraConfig, GrassmannElement
from src.algebra.supermatrix import MatrixE, block_diag, diag, identity_matrix, zero_matrix
from src.core.errors import IdentityViolationError, ParityError, ShapeError, UnsupportedSizeError
from src.core.logging_config import setup_logging
from src.services.charpoly_service import (
    CharPoly,
    CharPolyService,
    charpoly_oracle,
    eval_poly,
    faddeev_leverrier,
    power_traces,
)
from src.services.trial_service import random_homogeneous_matrix, trial_rng


def random_even(n, seed, generator_count=8):
    return random_homogeneous_matrix(n, "even", generator_count, 4, 2, trial_rng(seed, n))


def test_rational_matrix_example():
    p = faddeev_leverrier(MatrixE(AlgebraConfig(1), [[1, 2], [3, 4]]))
    assert [c.scalar_part for c in p.coeffs] == [-2, -5, 1]
    assert p.determinant() == -2


def test_nilpotent_diagonal_example(config4):
    p = faddeev_leverrier(diag(config4, ["v1^v2", "v3^v4"]))
    assert p[1] == GrassmannElement.from_terms(config4, [((1, 2), -1), ((3, 4), -1)])
    assert p[0] == GrassmannElement.from_terms(config4, [((1, 2, 3, 4), 1)])
    assert p[2] == 1


def test_identity_matrix():
    p = faddeev_leverrier(identity_matrix(3, AlgebraConfig(1)))
    assert [c.scalar_part for c in p.coeffs] == [-1, 3, -3, 1]


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_agrees_with_leibniz_oracle(n, seed):
    h = random_even(n, seed)
    assert faddeev_leverrier(h) == charpoly_oracle(h)


@pytest.mark.parametrize("seed", range(4))
def test_cayley_hamilton_holds(seed):
    h = random_even(3, seed)
    assert eval_poly(faddeev_leverrier(h), h).is_zero()


def test_block_diagonal_is_multiplicative():
    h1, h2 = random_even(2, 5), random_even(1, 6)
    assert faddeev_leverrier(block_diag(h1, h2)) == faddeev_leverrier(h1) * faddeev_leverrier(h2)


def test_matches_sympy_on_rational_matrices():
    rows = [[Fraction(1, 2), 3, -1], [0, 2, Fraction(5, 3)], [4, -2, 1]]
    p = faddeev_leverrier(MatrixE(AlgebraConfig(1), rows))
    expected = sp.Matrix(rows).charpoly(sp.Symbol("x")).all_coeffs()[::-1]
    assert [c.scalar_part for c in p.coeffs] == [Fraction(int(c.p), int(c.q)) for c in expected]


def test_precomputed_traces_are_used():
    h = random_even(2, 9)
    traces = power_traces(h)
    assert faddeev_leverrier(h, traces=traces) == faddeev_leverrier(h)
    with pytest.raises(ShapeError):
        faddeev_leverrier(h, traces=traces[:2])


def test_odd_matrix_rejected(config4):
    with pytest.raises(ParityError):
        faddeev_leverrier(MatrixE(config4, [[0, "v1"], ["v2", 0]]))


def test_oracle_size_limit():
    with pytest.raises(UnsupportedSizeError):
        charpoly_oracle(identity_matrix(6, AlgebraConfig(1)))


def test_charpoly_invariants(config4):
    one = GrassmannElement.one(config4)
    with pytest.raises(ShapeError):
        CharPoly((one,))
    with pytest.raises(ShapeError):
        CharPoly((one, one.scale(2)))
    with pytest.raises(ParityError):
        CharPoly((GrassmannElement.generator(config4, 1), one))


def test_zero_and_one_by_one(config4):
    assert [c.is_zero for c in faddeev_leverrier(zero_matrix(3, config4)).coeffs] == [True, True, True, False]
    c = GrassmannElement.from_terms(config4, [((), 3), ((1, 4), -1)])
    assert charpoly_oracle(MatrixE(config4, [[c]])).coeffs == (-c, 1)


def test_eval_poly_size_mismatch():
    config = AlgebraConfig(1)
    p = faddeev_leverrier(identity_matrix(2, config))
    with pytest.raises(ShapeError):
        eval_poly(p, identity_matrix(3, config))


def leibniz_determinant(h):
    total = GrassmannElement.zero(h.config)
    for perm in permutations(range(h.n)):
        inversions = sum(1 for i in range(h.n) for j in range(i + 1, h.n) if perm[i] > perm[j])
        term = GrassmannElement.one(h.config)
        for i, j in enumerate(perm):
            term = term * h[i, j]
        total = total + (term if inversions % 2 == 0 else -term)
    return total


@pytest.mark.parametrize("n", [1, 2, 3])
def test_determinant_matches_leibniz_expansion(n):
    h = random_even(n, 40 + n)
    assert faddeev_leverrier(h).determinant() == leibniz_determinant(h)


def test_determinant_matches_sympy():
    rows = [[2, Fraction(1, 3), 0, -1], [1, 1, 4, 0], [Fraction(-5, 2), 0, 3, 2], [0, 7, -1, 1]]
    p = faddeev_leverrier(MatrixE(AlgebraConfig(1), rows))
    det = sp.Matrix(rows).det()
    assert p.determinant() == Fraction(int(det.p), int(det.q))


def test_service_checks_and_returns():
    h = random_even(3, 12)
    service = CharPolyService()
    assert service.characteristic_polynomial(h, check=True) == faddeev_leverrier(h)
    assert service.determinant(h) == leibniz_determinant(h)


def test_service_reports_oracle_disagreement(mocker):
    h = random_even(2, 3)
    wrong = faddeev_leverrier(identity_matrix(2, h.config))
    mocker.patch("src.services.charpoly_service.charpoly_oracle", return_value=wrong)
    with pytest.raises(IdentityViolationError):
        CharPolyService().characteristic_polynomial(h, check=True)
    # without the check nothing is compared
    assert CharPolyService().characteristic_polynomial(h) == faddeev_leverrier(h)


def test_service_logs_and_reraises(config4, capsys, reset_structlog):
    setup_logging(log_level="ERROR")
    with pytest.raises(ParityError):
        CharPolyService().characteristic_polynomial(MatrixE(config4, [["v1"]]))
    assert "Error computing characteristic polynomial" in capsys.readouterr().err

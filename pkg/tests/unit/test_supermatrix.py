import json
from fractions import Fraction

import pytest

from src.algebra.grassmann import AlgebraConfig, Context, GrassmannElement, Parity
from src.algebra.supermatrix import (
    MatrixE,
    block_diag,
    diag,
    embed_matrix,
    identity_matrix,
    mat_add,
    mat_mul,
    mat_pow,
    mat_powers,
    mat_scalar_mul,
    mat_sub,
    matrix_from_json,
    max_generator_index,
    parity_of_matrix,
    scalar_matrix,
    trace,
    trace_of_product,
    zero_matrix,
)
from src.core.errors import ConfigMismatchError, FormatError, ShapeError


def test_mat_pow_of_offdiagonal_odd(config4):
    m = MatrixE(config4, [[0, "v1"], ["v2", 0]])
    assert mat_pow(m, 2) == MatrixE(config4, [["v1^v2", 0], [0, "-v1^v2"]])
    assert mat_pow(m, 0) == identity_matrix(2, config4)


def test_identity_and_zero_scaling(config4, random_pair):
    _, b = random_pair(3, generator_count=4)
    assert mat_mul(identity_matrix(3, config4), b) == b
    assert mat_scalar_mul(0, b).is_zero()
    assert mat_sub(mat_add(b, b), b) == b


def test_trace_examples(cor25_witness):
    config = AlgebraConfig(1)
    assert trace(identity_matrix(3, config)) == 3
    assert trace(cor25_witness).is_zero
    v123 = GrassmannElement.from_terms(cor25_witness.config, [((1, 2, 3), 1)])
    assert trace(mat_pow(cor25_witness, 3)) == v123.scale(6)
    assert mat_pow(cor25_witness, 3) == scalar_matrix(v123.scale(3), 2)


def test_trace_of_product_matches_trace(random_pair):
    a, b = random_pair(3)
    assert trace_of_product(a, b) == trace(a @ b)


def test_mixed_traces_coincide(random_pair):
    # even entries are central, so tr(A^r B A^s) only depends on r + s
    a, b = random_pair(3, seed=4)
    a2 = a @ a
    assert trace(a2 @ b) == trace(a @ b @ a) == trace(b @ a2)


def test_parity_examples(config4):
    assert parity_of_matrix(identity_matrix(2, config4)) is Parity.EVEN
    assert parity_of_matrix(MatrixE(config4, [[0, "v1"], ["v2", 0]])) is Parity.ODD
    assert parity_of_matrix(MatrixE(config4, [[1, "v1"], [0, 0]])) is Parity.MIXED
    assert parity_of_matrix(zero_matrix(2, config4)) is Parity.ZERO


def test_shape_and_config_checks(config4, config6):
    with pytest.raises(ShapeError):
        MatrixE(config4, [[1, 2]])
    with pytest.raises(ShapeError):
        identity_matrix(2, config4) @ identity_matrix(3, config4)
    with pytest.raises(ConfigMismatchError):
        identity_matrix(2, config4) + identity_matrix(2, config6)


def test_scalar_matrix_detection(config4):
    lam = GrassmannElement.from_terms(config4, [((1, 2), 2)])
    m = scalar_matrix(lam, 3)
    assert m.is_scalar_matrix() and m.scalar_value() == lam
    assert not diag(config4, [1, 2]).is_scalar_matrix()


def test_block_diag_and_embed(config4):
    m = block_diag(diag(config4, ["v1^v2"]), diag(config4, [3, 4]))
    assert m.n == 3 and m[0, 0] == GrassmannElement.from_terms(config4, [((1, 2), 1)]) and m[2, 2] == 4
    f = embed_matrix(m)
    assert f.config.context is Context.F
    assert max_generator_index(m) == 2


def test_json_round_trip_and_inference(config4):
    m = MatrixE(config4, [["1/2", "v1"], ["-v3", "v1^v2"]])
    assert matrix_from_json(m.dumps()) == m
    inferred = matrix_from_json({"n": 1, "entries": [[{"terms": [{"blade": [3], "coeff": "1"}]}]]})
    assert inferred.config == AlgebraConfig(3)
    assert matrix_from_json({"n": 1, "entries": [["2 * v5^v1"]]}).config == AlgebraConfig(5)
    assert json.loads(m.dumps())["generator_count"] == 4


def test_json_errors():
    with pytest.raises(FormatError):
        matrix_from_json("{not json")
    with pytest.raises(FormatError):
        matrix_from_json({"entries": []})
    with pytest.raises(ShapeError):
        matrix_from_json({"n": 2, "entries": [["1", "0"]]})


def test_mat_powers_prefix(random_pair):
    a, _ = random_pair(2)
    powers = mat_powers(a, 3)
    assert len(powers) == 4
    assert powers[3] == mat_pow(a, 3)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_products_follow_parity_rules(random_pair, seed):
    a, b = random_pair(3, seed=seed)
    other_a, other_b = random_pair(3, seed=seed, index=1)
    assert (a @ other_a).parity().is_even_like
    assert (b @ other_b).parity().is_even_like
    assert (a @ b).parity().is_odd_like
    assert (b @ a).parity().is_odd_like
    assert (a + b).parity() is Parity.MIXED


def test_trace_is_linear(random_pair):
    a, b = random_pair(3, seed=8)
    x, y = random_pair(3, seed=8, index=1)
    lam = GrassmannElement.from_terms(a.config, [((1, 2), 3), ((), Fraction(1, 2))])
    assert trace(a + x) == trace(a) + trace(x)
    assert trace(b - y) == trace(b) - trace(y)
    assert trace(a.scale(lam)) == lam * trace(a)
    assert trace(b.scale(lam)) == lam * trace(b)
    assert trace(a.scale(Fraction(-2, 3))) == trace(a).scale(Fraction(-2, 3))


@pytest.mark.parametrize("i, j", [(0, 3), (1, 1), (2, 3), (4, 1)])
def test_powers_add_exponents(random_pair, i, j):
    a, b = random_pair(2, seed=i + j)
    for m in (a, b, a + b):
        assert mat_pow(m, i + j) == mat_pow(m, i) @ mat_pow(m, j)

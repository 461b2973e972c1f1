import pytest
import structlog

from config import get_settings
from src.algebra.grassmann import AlgebraConfig, Context, GrassmannElement
from src.algebra.supermatrix import MatrixE, diag
from src.services.trial_service import random_homogeneous_matrix, trial_rng


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Settings are cached; every test starts from a clean environment."""
    monkeypatch.delenv("GRADED_ALGEBRA_DEFAULT_GENERATOR_COUNT", raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def reset_structlog():
    yield
    structlog.reset_defaults()


@pytest.fixture
def config4():
    return AlgebraConfig(4)


@pytest.fixture
def config6():
    return AlgebraConfig(6)


@pytest.fixture
def f_config4():
    return AlgebraConfig(4, Context.F)


@pytest.fixture
def v(config6):
    """v(1, 2) is v1^v2 under a 6-generator configuration."""

    def build(*indices):
        return GrassmannElement.from_terms(config6, [(indices, 1)])

    return build


@pytest.fixture
def cor25_witness():
    """[[v1, v2], [v3, -v1]]: tr(B) = tr(B^2) = 0 and B^3 = 3 v1v2v3 I."""
    return MatrixE(AlgebraConfig(3), [["v1", "v2"], ["v3", "-v1"]])


@pytest.fixture
def hand_pair():
    """A = diag(1, 0), B = [[0, v1], [v2, 0]]."""
    config = AlgebraConfig(2)
    return diag(config, [1, 0]), MatrixE(config, [[0, "v1"], ["v2", 0]])


@pytest.fixture
def random_pair():
    """Seeded (A, B) of size n over G generators."""

    def build(n, generator_count=10, seed=0, index=0, degree=3, terms=2):
        rng = trial_rng(seed, index)
        a = random_homogeneous_matrix(n, "even", generator_count, degree, terms, rng)
        b = random_homogeneous_matrix(n, "odd", generator_count, degree, terms, rng)
        return a, b

    return build


@pytest.fixture
def random_odd():
    def build(n, generator_count=16, seed=0, index=0, degree=3, terms=2):
        return random_homogeneous_matrix(n, "odd", generator_count, degree, terms, trial_rng(seed, index))

    return build

import json

import pytest

from config import GENERATOR_COUNT_ENV, get_settings
from src.algebra.grassmann import Parity
from src.algebra.supermatrix import identity_matrix, mat_pow, trace
from src.core.errors import IdentityViolationError, TrialConfigError
from src.schemas.trial_schemas import GeneratorCountSource, TheoremSelector, TrialConfig, Verdict
from src.services.trial_service import (
    TrialRunner,
    allowed_degrees,
    cor25_family,
    execute_trial,
    heuristic_generator_count,
    patterned_odd_matrix,
    random_homogeneous_matrix,
    resolve_generator_count,
    trial_rng,
)


def config(theorem="thm21", n=2, **overrides):
    values = {"theorem": theorem, "n": n, "generator_count": 8, "trials": 3, "seed": 7}
    values.update(overrides)
    return TrialConfig(**values)


def without_timing(outcome):
    return outcome.model_dump(exclude={"elapsed_ms"})


def test_same_seed_and_index_give_same_matrix():
    first = random_homogeneous_matrix(3, "odd", 10, 3, 2, trial_rng(42, 5))
    again = random_homogeneous_matrix(3, "odd", 10, 3, 2, trial_rng(42, 5))
    other = random_homogeneous_matrix(3, "odd", 10, 3, 2, trial_rng(42, 6))
    assert first == again
    assert first != other


@pytest.mark.parametrize("parity", [Parity.EVEN, Parity.ODD])
def test_random_matrix_is_homogeneous(parity):
    m = random_homogeneous_matrix(3, parity, 10, 4, 3, trial_rng(1, 0))
    assert m.parity() is parity
    assert all(value.max_degree <= 4 for _, _, value in m.entries())


def test_upper_only_matrix_is_strictly_upper():
    m = random_homogeneous_matrix(3, "odd", 10, 3, 2, trial_rng(0, 0), upper_only=True)
    assert all(value.is_zero for i, j, value in m.entries() if j <= i)


@pytest.mark.parametrize(
    "parity, generator_count, degree", [(Parity.ODD, 1, 1), (Parity.EVEN, 2, 2)]
)
def test_repeated_blades_never_cancel_to_zero(parity, generator_count, degree):
    # one or two blades to choose from, so equal draws with opposite signs are common
    for index in range(2000):
        m = random_homogeneous_matrix(1, parity, generator_count, degree, 2, trial_rng(0, index))
        assert not m[0, 0].is_zero
        assert m.parity() is parity


def test_random_matrix_argument_errors():
    with pytest.raises(TrialConfigError):
        random_homogeneous_matrix(2, "mixed", 4, 3, 2, trial_rng(0, 0))
    with pytest.raises(TrialConfigError):
        random_homogeneous_matrix(2, "odd", 4, 0, 2, trial_rng(0, 0))
    with pytest.raises(TrialConfigError):
        random_homogeneous_matrix(1, "odd", 4, 3, 2, trial_rng(0, 0), upper_only=True)


def test_allowed_degrees():
    assert allowed_degrees(Parity.EVEN, 10, 4) == [0, 2, 4]
    assert allowed_degrees(Parity.ODD, 2, 5) == [1]


def test_patterned_matrix_has_vanishing_low_traces():
    b = patterned_odd_matrix(6, trial_rng(3, 1))
    assert trace(b).is_zero and trace(mat_pow(b, 2)).is_zero
    with pytest.raises(TrialConfigError):
        patterned_odd_matrix(2, trial_rng(3, 1))


def test_heuristic_generator_count():
    assert heuristic_generator_count(2) == 24
    assert heuristic_generator_count(3) == 60
    assert heuristic_generator_count(6) == 127


def test_resolve_generator_count(monkeypatch):
    assert resolve_generator_count(TheoremSelector.THM21, 2, 5) == (5, GeneratorCountSource.FLAG)
    assert resolve_generator_count(TheoremSelector.THM23, 2) == (24, GeneratorCountSource.HEURISTIC)
    assert resolve_generator_count(TheoremSelector.THM21, 2) == (16, GeneratorCountSource.DEFAULT)
    monkeypatch.setenv(GENERATOR_COUNT_ENV, "12")
    get_settings.cache_clear()
    assert resolve_generator_count(TheoremSelector.THM23, 3) == (12, GeneratorCountSource.ENV)


def test_trial_config_rejects_bad_sizes():
    with pytest.raises(ValueError):
        config("cor22", n=3)
    with pytest.raises(ValueError):
        config("cor27", n=4)
    with pytest.raises(ValueError):
        config("cor25", n=1)
    with pytest.raises(ValueError):
        config("thm21", generator_count=128)


def test_cor25_families():
    assert cor25_family(2, 0) == cor25_family(2, 1) == "patterned"
    assert [cor25_family(3, i) for i in range(3)] == ["strictly_upper", "random_odd", "strictly_upper"]


def test_execute_trial_is_deterministic():
    cfg = config("thm23", n=2, generator_count=12)
    assert without_timing(execute_trial(cfg, 1)) == without_timing(execute_trial(cfg, 1))


@pytest.mark.parametrize("theorem,n", [("thm21", 2), ("thm23", 2), ("cor22", 2), ("cor27", 2), ("cor25", 2)])
def test_run_trials_all_zero(theorem, n):
    report = TrialRunner().run_trials(config(theorem, n=n, generator_count=10))
    assert report.summary.all_zero
    assert report.summary.trials == 3
    assert not report.failed
    assert all(t.verdict is Verdict.ZERO for t in report.trials)


def test_thm21_cross_checks_recorded():
    report = TrialRunner().run_trials(config())
    assert all(t.cross_checks == ["route_equivalence"] for t in report.trials)


def test_cor25_mixes_hypothesis_outcomes():
    report = TrialRunner().run_trials(config("cor25", n=3, generator_count=10, trials=4))
    assert report.summary.all_zero
    upper = [t for t in report.trials if t.family == "strictly_upper"]
    assert upper and all(t.verdict is Verdict.ZERO for t in upper)
    assert report.summary.hypothesis_unmet_count == sum(
        1 for t in report.trials if t.verdict is Verdict.HYPOTHESIS_NOT_SATISFIED
    )


def test_nonzero_lhs_raises_with_witness(mocker):
    mocker.patch(
        "src.services.trial_service.sum_terms",
        side_effect=lambda terms, n, cfg_: identity_matrix(n, cfg_),
    )
    with pytest.raises(IdentityViolationError) as excinfo:
        TrialRunner().run_trials(config())
    error = excinfo.value
    assert error.witness["check"] == "lhs_zero"
    assert error.witness["trial_index"] == 0 and error.witness["seed"] == 7
    assert error.report["summary"]["failed_count"] == 3


def test_failed_cross_check_reported(mocker):
    mocker.patch("src.services.trial_service.theorem21_data_via_companion", return_value=None)
    report = TrialRunner().run_trials(config(), raise_on_failure=False)
    assert report.failed
    assert report.trials[0].verdict is Verdict.CROSS_CHECK_FAILED
    assert report.trials[0].witness.check == "route_equivalence"


def test_report_json_without_timings():
    report = TrialRunner().run_trials(config())
    data = json.loads(report.to_json(include_timings=False))
    assert "elapsed_ms" not in data["summary"]
    assert all("elapsed_ms" not in t for t in data["trials"])
    assert data["config"]["seed"] == 7
    assert data["prng"]["algorithm"] == "numpy.random.PCG64"


def test_worker_count_does_not_change_results():
    serial = TrialRunner().run_trials(config("thm23", trials=4, generator_count=12))
    parallel = TrialRunner().run_trials(config("thm23", trials=4, generator_count=12, workers=2))
    assert [without_timing(t) for t in serial.trials] == [without_timing(t) for t in parallel.trials]

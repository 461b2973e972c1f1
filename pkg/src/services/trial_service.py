"""
Seeded randomized verification of the graded identities.

Every trial draws its own PRNG stream from (seed, trial index), so trials are
independent of execution order and of the number of workers.
"""

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import repeat
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from config import GENERATOR_COUNT_ENV, Settings, get_settings
from src.algebra.grassmann import MAX_GENERATORS, AlgebraConfig, GrassmannElement, Parity, blade_from_indices
from src.algebra.supermatrix import MatrixE, mat_powers, zero_matrix
from src.core.errors import IdentityViolationError, TrialConfigError
from src.core.logging_config import LoggerMixin, get_logger
from src.schemas.trial_schemas import (
    GeneratorCountSource,
    TheoremSelector,
    TrialConfig,
    TrialOutcome,
    TrialReport,
    TrialSummary,
    Verdict,
    Witness,
)
from src.services.graded_identity_service import (
    IdentityTerm,
    corollary22_terms,
    corollary25_check,
    corollary25_terms,
    corollary27_terms,
    leading_term_check,
    odd_powers,
    sum_terms,
    theorem21_data,
    theorem21_data_via_companion,
    theorem21_terms,
    theorem23_data,
    theorem23_terms,
)

logger = get_logger(__name__)

THM23_FAMILY = (TheoremSelector.THM23, TheoremSelector.COR25, TheoremSelector.COR27)


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, trial_index])))


def heuristic_generator_count(n: int) -> int:
    """4n(2n-1): enough generators for B^{2n-1} to survive truncation."""
    return min(4 * n * (2 * n - 1), MAX_GENERATORS)


def resolve_generator_count(
    theorem: TheoremSelector, n: int, flag: Optional[int] = None, settings: Optional[Settings] = None
) -> Tuple[int, GeneratorCountSource]:
    """Flag, then the environment variable, then the thm23 heuristic, then the settings default."""
    settings = settings or get_settings()
    if flag is not None:
        return flag, GeneratorCountSource.FLAG
    if os.environ.get(GENERATOR_COUNT_ENV):
        return settings.algebra.default_generator_count, GeneratorCountSource.ENV
    if theorem in THM23_FAMILY:
        return heuristic_generator_count(n), GeneratorCountSource.HEURISTIC
    return settings.algebra.default_generator_count, GeneratorCountSource.DEFAULT


def environment_echo() -> Dict[str, Optional[str]]:
    return {GENERATOR_COUNT_ENV: os.environ.get(GENERATOR_COUNT_ENV)}


# ---------------------------------------------------------------- generation


def _random_coefficient(rng: np.random.Generator, numerator_bound: int, denominator_max: int) -> Fraction:
    numerator = int(rng.integers(1, numerator_bound + 1))
    if rng.integers(0, 2):
        numerator = -numerator
    return Fraction(numerator, int(rng.integers(1, denominator_max + 1)))


def _random_entry(
    config: AlgebraConfig,
    degrees: List[int],
    terms: int,
    rng: np.random.Generator,
    numerator_bound: int,
    denominator_max: int,
) -> GrassmannElement:
    # repeated blades can cancel; an entry that sums to zero is drawn again
    while True:
        acc: Dict[int, Fraction] = {}
        for _ in range(terms):
            degree = int(rng.choice(degrees))
            indices = rng.choice(config.generator_count, size=degree, replace=False) + 1
            blade = blade_from_indices(int(i) for i in indices)
            acc[blade] = acc.get(blade, Fraction(0)) + _random_coefficient(rng, numerator_bound, denominator_max)
        entry = GrassmannElement(config, acc)
        if not entry.is_zero:
            return entry


def allowed_degrees(parity: Parity, generator_count: int, degree: int) -> List[int]:
    top = min(degree, generator_count)
    start = 0 if parity is Parity.EVEN else 1
    return list(range(start, top + 1, 2))


def random_homogeneous_matrix(
    n: int,
    parity: Union[Parity, str],
    generator_count: int,
    degree: int,
    terms: int,
    rng: np.random.Generator,
    *,
    numerator_bound: int = 9,
    denominator_max: int = 4,
    upper_only: bool = False,
) -> MatrixE:
    """
    n x n matrix whose entries are sums of ``terms`` random blades of the
    requested parity and degree <= ``degree``, with coefficients p/q for
    nonzero p in -numerator_bound..numerator_bound and q in 1..denominator_max.

    Every drawn entry is nonzero, so the matrix classifies as the requested
    parity. ``upper_only`` fills the strictly upper triangle and leaves the
    rest zero.
    """
    parity = Parity(parity)
    if parity not in (Parity.EVEN, Parity.ODD):
        raise TrialConfigError(f"random matrices are even or odd, not {parity.value}")
    if n < 1 or terms < 1:
        raise TrialConfigError("n and terms must be at least 1")
    if upper_only and n < 2:
        raise TrialConfigError("a strictly upper triangular matrix needs n >= 2")
    degrees = allowed_degrees(parity, generator_count, degree)
    if not degrees:
        raise TrialConfigError(f"no {parity.value} blades of degree <= {degree} over {generator_count} generators")
    config = AlgebraConfig(generator_count)
    zero = GrassmannElement.zero(config)
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            if upper_only and j <= i:
                row.append(zero)
            else:
                row.append(_random_entry(config, degrees, terms, rng, numerator_bound, denominator_max))
        rows.append(row)
    return MatrixE(config, rows)


def patterned_odd_matrix(
    generator_count: int, rng: np.random.Generator, numerator_bound: int = 9, denominator_max: int = 4
) -> MatrixE:
    """[[p v_i, q v_j], [r v_k, -p v_i]] with distinct i, j, k: tr(B) = tr(B^2) = 0."""
    if generator_count < 3:
        raise TrialConfigError("the patterned family needs at least 3 generators")
    config = AlgebraConfig(generator_count)
    i, j, k = (int(x) + 1 for x in rng.choice(generator_count, size=3, replace=False))
    p, q, r = (_random_coefficient(rng, numerator_bound, denominator_max) for _ in range(3))

    def v(index: int, c: Fraction) -> GrassmannElement:
        return GrassmannElement.generator(config, index).scale(c)

    return MatrixE(config, [[v(i, p), v(j, q)], [v(k, r), v(i, -p)]])


# ---------------------------------------------------------------- evaluation


@dataclass
class _Evaluation:
    inputs: Dict[str, MatrixE]
    terms: List[IdentityTerm]
    lhs: MatrixE
    checks: Dict[str, bool] = field(default_factory=dict)
    family: Optional[str] = None
    hypothesis_failure: Optional[str] = None
    note: Optional[str] = None


def _draw(cfg: TrialConfig, parity: Parity, rng: np.random.Generator, upper_only: bool = False) -> MatrixE:
    return random_homogeneous_matrix(
        cfg.n,
        parity,
        cfg.generator_count,
        cfg.degree,
        cfg.terms,
        rng,
        numerator_bound=cfg.numerator_bound,
        denominator_max=cfg.denominator_max,
        upper_only=upper_only,
    )


def _evaluate_thm21(cfg: TrialConfig, rng: np.random.Generator) -> _Evaluation:
    a, b = _draw(cfg, Parity.EVEN, rng), _draw(cfg, Parity.ODD, rng)
    a_powers = mat_powers(a, cfg.n - 1)
    data = theorem21_data(a, b, a_powers=a_powers)
    terms = theorem21_terms(a, b, data, a_powers=a_powers)
    checks = {"route_equivalence": theorem21_data_via_companion(a, b) == data}
    return _Evaluation({"A": a, "B": b}, terms, sum_terms(terms, cfg.n, a.config), checks)


def _evaluate_thm23(cfg: TrialConfig, rng: np.random.Generator) -> _Evaluation:
    b = _draw(cfg, Parity.ODD, rng)
    powers = odd_powers(b)
    data = theorem23_data(b, powers=powers)
    terms = theorem23_terms(b, data, powers=powers)
    # A = B^2 reuses the odd powers: (B^2)^s = B^{2s}
    checks = {
        "specialization": theorem21_data(powers.square, b, a_powers=powers.square_powers) == data,
        "leading_term": leading_term_check(terms, cfg.n),
    }
    return _Evaluation({"B": b}, terms, sum_terms(terms, cfg.n, b.config), checks)


def _evaluate_cor22(cfg: TrialConfig, rng: np.random.Generator) -> _Evaluation:
    a, b = _draw(cfg, Parity.EVEN, rng), _draw(cfg, Parity.ODD, rng)
    terms = corollary22_terms(a, b)
    data = theorem21_data(a, b)
    matches = (
        terms[0].coefficient == data.beta[0]
        and terms[1].coefficient == data.beta[1]
        and terms[2].coefficient == data.alpha[1]
    )
    return _Evaluation({"A": a, "B": b}, terms, sum_terms(terms, 2, a.config), {"closed_form_coefficients": matches})


def _evaluate_cor27(cfg: TrialConfig, rng: np.random.Generator) -> _Evaluation:
    b = _draw(cfg, Parity.ODD, rng)
    terms = corollary27_terms(b, cfg.n)
    general = theorem23_terms(b)
    matches = len(terms) == len(general) and all(
        c.power == g.power and c.coefficient == g.coefficient for c, g in zip(terms, general)
    )
    return _Evaluation({"B": b}, terms, sum_terms(terms, cfg.n, b.config), {"closed_form_coefficients": matches})


def cor25_family(n: int, index: int) -> str:
    if n == 2:
        return "patterned"
    return "strictly_upper" if index % 2 == 0 else "random_odd"


def _evaluate_cor25(cfg: TrialConfig, rng: np.random.Generator, index: int) -> _Evaluation:
    family = cor25_family(cfg.n, index)
    if family == "patterned":
        b = patterned_odd_matrix(cfg.generator_count, rng, cfg.numerator_bound, cfg.denominator_max)
    else:
        b = _draw(cfg, Parity.ODD, rng, upper_only=family == "strictly_upper")
    verdict = corollary25_check(b)
    terms = corollary25_terms(b)
    if not verdict.hypothesis_satisfied:
        return _Evaluation(
            {"B": b}, terms, zero_matrix(cfg.n, b.config), family=family, hypothesis_failure=verdict.summary()
        )
    lhs = verdict.residual
    if verdict.conclusion_holds and verdict.violations:
        # scalar conclusion held; the vanishing-trace strengthening did not
        lhs = verdict.top_power
    return _Evaluation({"B": b}, terms, lhs, family=family, note=verdict.summary())


def _evaluate(cfg: TrialConfig, rng: np.random.Generator, index: int) -> _Evaluation:
    if cfg.theorem is TheoremSelector.THM21:
        return _evaluate_thm21(cfg, rng)
    if cfg.theorem is TheoremSelector.THM23:
        return _evaluate_thm23(cfg, rng)
    if cfg.theorem is TheoremSelector.COR22:
        return _evaluate_cor22(cfg, rng)
    if cfg.theorem is TheoremSelector.COR27:
        return _evaluate_cor27(cfg, rng)
    return _evaluate_cor25(cfg, rng, index)


def execute_trial(cfg: TrialConfig, index: int) -> TrialOutcome:
    """Run trial ``index`` of ``cfg``; a pure function of (cfg, index) apart from timing."""
    start = time.perf_counter()
    evaluation = _evaluate(cfg, trial_rng(cfg.seed, index), index)
    nonzero = sum(1 for term in evaluation.terms if term.is_nonzero)
    inputs = {name: m.to_json() for name, m in evaluation.inputs.items()}

    witness = None
    failed_checks = [name for name, ok in evaluation.checks.items() if not ok]
    if evaluation.hypothesis_failure:
        verdict = Verdict.HYPOTHESIS_NOT_SATISFIED
    elif not evaluation.lhs.is_zero():
        verdict = Verdict.NONZERO
        row, column, element = evaluation.lhs.nonzero_entries()[0]
        witness = Witness(
            trial_index=index, seed=cfg.seed, check="lhs_zero", row=row, column=column, element=str(element), inputs=inputs
        )
    elif failed_checks:
        verdict = Verdict.CROSS_CHECK_FAILED
        witness = Witness(trial_index=index, seed=cfg.seed, check=failed_checks[0], inputs=inputs)
    else:
        verdict = Verdict.ZERO

    logger.debug(f"Trial {index}: {verdict.value}, {nonzero}/{len(evaluation.terms)} nonzero partial terms")
    return TrialOutcome(
        index=index,
        verdict=verdict,
        family=evaluation.family,
        nonzero_partial_terms=nonzero,
        total_partial_terms=len(evaluation.terms),
        vacuous=nonzero == 0,
        cross_checks=sorted(name for name, ok in evaluation.checks.items() if ok),
        note=evaluation.hypothesis_failure or evaluation.note,
        witness=witness,
        elapsed_ms=round((time.perf_counter() - start) * 1000, 3),
    )


# ---------------------------------------------------------------- runner


class TrialRunner(LoggerMixin):
    """Batch driver: runs every trial of a TrialConfig and assembles the report."""

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()

    def _summarize(self, cfg: TrialConfig, outcomes: List[TrialOutcome], elapsed_ms: float) -> TrialSummary:
        threshold = self.settings.harness.non_vacuity_threshold
        vacuous = sum(1 for t in outcomes if t.vacuous)
        fraction = (len(outcomes) - vacuous) / len(outcomes)
        return TrialSummary(
            all_zero=all(t.verdict in (Verdict.ZERO, Verdict.HYPOTHESIS_NOT_SATISFIED) for t in outcomes),
            trials=len(outcomes),
            vacuous_count=vacuous,
            non_vacuous_fraction=round(fraction, 6),
            meets_non_vacuity_threshold=fraction >= threshold,
            non_vacuity_threshold=threshold,
            hypothesis_unmet_count=sum(1 for t in outcomes if t.verdict is Verdict.HYPOTHESIS_NOT_SATISFIED),
            failed_count=sum(1 for t in outcomes if t.failed),
            elapsed_ms=elapsed_ms,
        )

    def run_trials(self, cfg: TrialConfig, raise_on_failure: bool = True) -> TrialReport:
        """
        Run ``cfg.trials`` trials and return the report.

        A nonzero left-hand side or a failed cross-check raises
        IdentityViolationError carrying the full report and the first witness,
        unless ``raise_on_failure`` is False.
        """
        self.logger.info(
            f"Starting {cfg.trials} {cfg.theorem.value} trials "
            f"(n={cfg.n}, G={cfg.generator_count}, seed={cfg.seed}, workers={cfg.workers})"
        )
        start = time.perf_counter()
        try:
            if cfg.workers > 1:
                with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                    outcomes = list(pool.map(execute_trial, repeat(cfg), range(cfg.trials)))
            else:
                outcomes = [execute_trial(cfg, i) for i in range(cfg.trials)]
        except Exception as e:
            self.logger.error(f"Trial batch failed: {str(e)}")
            raise
        outcomes.sort(key=lambda t: t.index)
        elapsed = round((time.perf_counter() - start) * 1000, 3)

        report = TrialReport(
            config=cfg,
            environment=environment_echo(),
            trials=outcomes,
            summary=self._summarize(cfg, outcomes, elapsed),
        )
        if not report.summary.meets_non_vacuity_threshold:
            self.logger.warning(
                f"Only {report.summary.non_vacuous_fraction:.0%} of trials were non-vacuous "
                f"(threshold {report.summary.non_vacuity_threshold:.0%})"
            )
        if report.failed:
            first = next(t for t in outcomes if t.failed)
            message = f"{cfg.theorem.value} trial {first.index} failed check {first.witness.check}"
            self.logger.error(message)
            if raise_on_failure:
                raise IdentityViolationError(
                    message, report=report.model_dump(mode="json"), witness=first.witness.model_dump(mode="json")
                )
        else:
            self.logger.info(f"All {cfg.trials} trials passed in {elapsed} ms")
        return report

import json
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, model_validator

from src.algebra.grassmann import MAX_GENERATORS

SCHEMA_VERSION = "1.0"
TIMING_FIELDS = {"elapsed_ms"}


class TheoremSelector(str, Enum):
    THM21 = "thm21"
    THM23 = "thm23"
    COR22 = "cor22"
    COR25 = "cor25"
    COR27 = "cor27"


class GeneratorCountSource(str, Enum):
    FLAG = "flag"
    ENV = "env"
    HEURISTIC = "heuristic"
    DEFAULT = "default"


class Verdict(str, Enum):
    ZERO = "zero"
    NONZERO = "nonzero"
    HYPOTHESIS_NOT_SATISFIED = "hypothesis_not_satisfied"
    CROSS_CHECK_FAILED = "cross_check_failed"


# --- Configuration ---
class TrialConfig(BaseModel):
    theorem: TheoremSelector
    n: int = Field(..., ge=1)
    generator_count: int = Field(..., ge=1, le=MAX_GENERATORS)
    trials: int = Field(25, ge=1)
    seed: int = Field(0, ge=0, lt=2**64)
    degree: int = Field(3, ge=1)
    terms: int = Field(2, ge=1)
    workers: int = Field(1, ge=1)
    generator_count_source: GeneratorCountSource = GeneratorCountSource.FLAG
    numerator_bound: int = Field(9, ge=1)
    denominator_max: int = Field(4, ge=1)

    @model_validator(mode="after")
    def check_theorem_size(self) -> "TrialConfig":
        if self.theorem is TheoremSelector.COR22 and self.n != 2:
            raise ValueError("cor22 is the n = 2 closed form; use --n 2")
        if self.theorem is TheoremSelector.COR27 and self.n not in (2, 3):
            raise ValueError("cor27 closed forms exist for n = 2 and n = 3 only")
        if self.theorem is TheoremSelector.COR25 and self.n < 2:
            raise ValueError("cor25 needs n >= 2")
        if self.theorem is TheoremSelector.COR25 and self.n == 2 and self.generator_count < 3:
            raise ValueError("the cor25 patterned family needs at least 3 generators")
        return self

    def uses_pair(self) -> bool:
        return self.theorem in (TheoremSelector.THM21, TheoremSelector.COR22)


class PrngInfo(BaseModel):
    algorithm: str = "numpy.random.PCG64"
    seeding: str = "SeedSequence([seed, trial_index])"


# --- Trials ---
class Witness(BaseModel):
    """Everything needed to replay one failing trial."""

    trial_index: int
    seed: int
    check: str
    row: Optional[int] = None
    column: Optional[int] = None
    element: Optional[str] = None
    inputs: Dict[str, Any] = Field(default_factory=dict)


class TrialOutcome(BaseModel):
    index: int
    verdict: Verdict
    family: Optional[str] = None
    nonzero_partial_terms: int = 0
    total_partial_terms: int = 0
    vacuous: bool = False
    cross_checks: List[str] = Field(default_factory=list)
    note: Optional[str] = None
    witness: Optional[Witness] = None
    elapsed_ms: float = 0.0

    @model_validator(mode="after")
    def nonzero_carries_witness(self) -> "TrialOutcome":
        if self.verdict in (Verdict.NONZERO, Verdict.CROSS_CHECK_FAILED) and self.witness is None:
            raise ValueError(f"a {self.verdict.value} verdict must carry a witness")
        return self

    @property
    def failed(self) -> bool:
        return self.verdict in (Verdict.NONZERO, Verdict.CROSS_CHECK_FAILED)


class TrialSummary(BaseModel):
    all_zero: bool
    trials: int
    vacuous_count: int
    non_vacuous_fraction: float
    meets_non_vacuity_threshold: bool
    non_vacuity_threshold: float
    hypothesis_unmet_count: int = 0
    failed_count: int = 0
    elapsed_ms: float = 0.0


class TrialReport(BaseModel):
    schema_version: str = SCHEMA_VERSION
    config: TrialConfig
    prng: PrngInfo = Field(default_factory=PrngInfo)
    environment: Dict[str, Optional[str]] = Field(default_factory=dict)
    trials: List[TrialOutcome]
    summary: TrialSummary

    @property
    def failed(self) -> bool:
        return any(t.failed for t in self.trials)

    def to_json(self, include_timings: bool = True, indent: Optional[int] = 2) -> str:
        data = self.model_dump(mode="json")
        if not include_timings:
            data["summary"].pop("elapsed_ms", None)
            for trial in data["trials"]:
                for name in TIMING_FIELDS:
                    trial.pop(name, None)
        return json.dumps(data, indent=indent, sort_keys=True)


# --- Self test ---
class CheckResult(BaseModel):
    name: str
    passed: bool
    detail: Optional[str] = None


class SelfTestReport(BaseModel):
    schema_version: str = SCHEMA_VERSION
    checks: List[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self, indent: Optional[int] = 2) -> str:
        data = self.model_dump(mode="json")
        data["passed"] = self.passed
        return json.dumps(data, indent=indent, sort_keys=True)

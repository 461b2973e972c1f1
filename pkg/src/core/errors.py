from typing import Any, Dict, Optional


class AlgebraError(ValueError):
    """Base class for every error raised by the algebra and identity layers."""


class ConfigMismatchError(AlgebraError):
    """Operands were built under different algebra configurations."""


class GeneratorRangeError(AlgebraError):
    """A blade uses a generator index outside the configured capacity."""


class ParityError(AlgebraError):
    """An operand does not have the parity an operation requires."""


class ShapeError(AlgebraError):
    """Matrix sizes do not match, or a matrix is not square."""


class UnsupportedSizeError(AlgebraError):
    """A closed form was requested for a matrix size it does not cover."""


class FormatError(AlgebraError):
    """Text, JSON or emit format could not be parsed or is unknown."""


class TrialConfigError(AlgebraError):
    """The harness configuration is inconsistent (e.g. cor22 with n != 2)."""


class IdentityViolationError(AlgebraError):
    """
    An identity left-hand side evaluated to a nonzero matrix.

    Never expected: it signals an implementation bug. The partial report and
    the witness needed to replay the trial travel with the exception.
    """

    def __init__(
        self,
        message: str,
        report: Optional[Dict[str, Any]] = None,
        witness: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message)
        self.report = report
        self.witness = witness

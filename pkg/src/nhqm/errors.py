"""Exception types shared across the package.

Split into two families so the CLI can map them to exit codes:
domain preconditions (exit code 2) and numerical failures (exit code 3).
"""


class NhqmError(Exception):
    """Base class for all package errors."""


class ConfigError(NhqmError):
    """Invalid or incomplete run configuration."""


class PreconditionError(NhqmError):
    """A documented domain precondition was violated."""


class NumericalError(NhqmError):
    """A computation failed to reach its accuracy contract."""


# -- preconditions -----------------------------------------------------------

class DimensionMismatch(PreconditionError):
    pass


class SpectrumNotReal(PreconditionError):
    pass


class UnpairedComplexEigenvalue(PreconditionError):
    pass


class NotPositiveDefinite(PreconditionError):
    pass


class ZeroNormState(PreconditionError):
    pass


class ZeroProjection(PreconditionError):
    pass


class GSquareNotPSD(PreconditionError):
    pass


class ExceptionalPoint(PreconditionError):
    pass


class NonStationaryInitialDensity(PreconditionError):
    pass


class NonHermitianPerturbation(PreconditionError):
    pass


class FillingUnreachable(PreconditionError):
    pass


class DimensionTooLarge(PreconditionError):
    pass


# -- numerical failures ------------------------------------------------------

class NotDiagonalizable(NumericalError):
    pass


class SingularMetric(NumericalError):
    pass


class SingularOverlap(NumericalError):
    pass


class ZeroPartitionFunction(NumericalError):
    pass


class StepSizeNotConverged(NumericalError):
    pass


class RootCountMismatch(NumericalError):
    pass

"""Exception types shared across the package."""


class SplitSpecError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(SplitSpecError):
    """Operator, state, or basis dimensions are inconsistent."""


class NonHermitianError(SplitSpecError):
    """A matrix required to be Hermitian is not, within tolerance."""


class InvalidPartitionError(SplitSpecError):
    """A tripartition or site subset violates the chain conventions."""


class SizeLimitError(SplitSpecError):
    """Requested chain length exceeds the dense-matrix budget."""


class ConvergenceError(SplitSpecError):
    """The eigensolver failed to converge."""


class EmptyWindowError(SplitSpecError):
    """An eigenstate selection window contains no states."""


class SplitAnnihilatedError(SplitSpecError):
    """The split operator annihilated the probed state (zero total weight)."""


class DensityMatrixError(SplitSpecError):
    """Input is not a valid density matrix (trace, hermiticity, or positivity)."""


class NonlinearDriveError(SplitSpecError):
    """The RF drive left the linear-response regime."""


class ConfigError(SplitSpecError):
    """An experiment configuration is malformed."""

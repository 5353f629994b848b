"""Error types raised by the simulator and experiment runners."""


class QrnnError(ValueError):
    """Base class for all simulator errors."""


class DomainError(QrnnError):
    """Input value outside the encodable range [-1, 1]."""


class DimensionMismatchError(QrnnError):
    """Operand shapes or qubit counts do not agree."""


class NotUnitaryError(QrnnError):
    """Matrix expected to be unitary is not."""


class NotHermitianError(QrnnError):
    """Matrix expected to be Hermitian is not."""


class InvariantViolationError(QrnnError):
    """A density matrix or sensitivity left its numerical slack."""


class IntegrationError(QrnnError):
    """Master-equation integration drifted beyond tolerance."""


class NonFiniteOracleError(QrnnError):
    """Cost or gradient oracle returned NaN or Inf."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class ConfigError(QrnnError):
    """Invalid experiment configuration."""


class SchemaError(QrnnError):
    """Rows do not match the declared CSV columns."""

"""Error taxonomy shared by all modules."""


class BmsFieldError(Exception):
    """Base class for package errors."""


class ShapeError(BmsFieldError, ValueError):
    """Input arrays or truncation orders do not match."""


class DomainError(BmsFieldError, ValueError):
    """Parameter outside its admissible range (k <= 1, nonpositive mass, ...)."""


class UnsupportedDirectionError(BmsFieldError, ValueError):
    """A sphere function lies outside the span of the configured directions."""


class CapOverflowError(BmsFieldError, ValueError):
    """An operation would push nonzero coefficients past the degree cap in strict mode."""


class CoverageError(BmsFieldError, RuntimeError):
    """Orbit nodes mapped outside the sampled rapidity window."""

    def __init__(self, message, escaped):
        super().__init__(message)
        self.escaped = list(escaped)


class ConstraintError(BmsFieldError, ValueError):
    """A precondition on constraint residuals is violated."""

    def __init__(self, message, residual_norms=None):
        super().__init__(message)
        self.residual_norms = residual_norms or {}


class SchemaError(BmsFieldError, ValueError):
    """A JSON document does not match the published schema."""


class ConfigError(BmsFieldError, ValueError):
    """Configuration violates an invariant (k > 1, N >= 2, ST directions l > 1)."""

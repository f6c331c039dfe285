"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes, so raising the right class matters:
config problems exit 2, data problems exit 3, numerical failures exit 4.
"""


class ExtremalQRError(Exception):
    """Base class for all package errors."""


class DomainError(ExtremalQRError, ValueError):
    """An input is outside the mathematical domain of an operation."""


class DegenerateSpacingError(DomainError):
    """A quantile spacing used as a denominator is zero or sign-flipped."""


class ApplicabilityError(DomainError):
    """An estimator's applicability condition fails (e.g. nonnegative tail)."""


class SolverError(ExtremalQRError, RuntimeError):
    """The optimization backend failed to return a usable solution."""


class UnboundedProgramError(SolverError):
    """The piecewise-linear program is unbounded; increase the truncation length."""


class DataError(ExtremalQRError, ValueError):
    """Input data could not be parsed or fails validation."""


class ConfigError(ExtremalQRError, ValueError):
    """A run configuration is inconsistent or incomplete."""

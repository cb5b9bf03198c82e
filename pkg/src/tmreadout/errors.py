"""Exception hierarchy shared by all modules."""


class TmReadoutError(Exception):
    """Base class for every error raised by this package."""


class DomainError(TmReadoutError, ValueError):
    """An input lies outside the domain where a formula is defined."""


class DegeneracyError(DomainError):
    """A linear system or formula is singular at the requested point."""


class ConvergenceError(TmReadoutError, ArithmeticError):
    """A numerical procedure did not converge."""


class ExtractionError(TmReadoutError, KeyError):
    """A required labeled eigenstate is missing from a spectrum."""

    def __str__(self):
        return str(self.args[0]) if self.args else "extraction error"


class InversionError(TmReadoutError, ArithmeticError):
    """A bracketed root search could not find a sign change."""


class StatisticsError(TmReadoutError):
    """A Monte-Carlo estimator has no samples to work with."""


class CalibrationError(TmReadoutError):
    """Not enough valid data to build a calibration."""


class ConfigError(TmReadoutError, ValueError):
    """A configuration document violates the schema."""


class InitializationError(TmReadoutError, ValueError):
    """An iterative search was started from an invalid point."""

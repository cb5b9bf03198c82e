"""Modeling toolkit for the cross-Kerr (cos phi) dispersive readout of a transmon molecule."""

__version__ = "0.1.0"

from .circuit import (  # noqa: E402
    BareModeParams,
    CavityParams,
    CircuitParams,
    PolaritonParams,
    derive_bare_modes,
    hybridize,
)
from .errors import (  # noqa: E402
    CalibrationError,
    ConfigError,
    DomainError,
    StatisticsError,
    TmReadoutError,
)

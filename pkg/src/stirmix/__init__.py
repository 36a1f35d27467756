"""Blinking-vortex stirring: exact Poincare map, averaged system, NAFF frequency maps."""
from .errors import ConfigError, NumericalError, StirmixError
from .vortex_core import TankConfig, half_period_map, orbit, poincare_map

__all__ = [
    "ConfigError",
    "NumericalError",
    "StirmixError",
    "TankConfig",
    "half_period_map",
    "orbit",
    "poincare_map",
]
__version__ = "0.1.0"

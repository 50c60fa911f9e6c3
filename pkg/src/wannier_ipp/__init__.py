"""Exponentially localized generalized Wannier functions by iterated projected position."""

__version__ = "0.1.0"

from .errors import (ConfigError, GapClosed, IPPError, NoUniformGaps,  # noqa: F401
                     NumericalError)

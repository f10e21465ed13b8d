"""Antidistinguishability error probabilities and error-exponent bounds
for classical and quantum ensembles."""

from .errors import (AntidistError, ConvergenceError, DomainError,
                     ResourceLimitError, ValidationError)
from .extreal import ExtReal

__all__ = [
    "AntidistError", "ConvergenceError", "DomainError",
    "ResourceLimitError", "ValidationError", "ExtReal",
]

__version__ = "0.1.0"

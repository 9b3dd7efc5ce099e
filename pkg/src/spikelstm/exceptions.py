"""Exceptions raised by spikelstm.

Every error carries the exit code the command line interface returns
when it is raised from a subcommand.
"""
from __future__ import annotations


class SpikeLSTMError(Exception):
    """Base class for all spikelstm errors."""
    exit_code = 1


class ConfigError(SpikeLSTMError):
    """Invalid or incomplete experiment configuration."""
    exit_code = 1


class ShapeError(SpikeLSTMError, ValueError):
    """Operands with incompatible shapes."""
    exit_code = 1


class DomainError(SpikeLSTMError, ValueError):
    """Argument outside the domain of a function."""
    exit_code = 1


class DimensionMismatchError(ConfigError):
    """Checkpoint dimensions do not match the configured task."""


class SizeError(SpikeLSTMError):
    """Instance too large for the reference gradient engine."""
    exit_code = 1


class DataFormatError(SpikeLSTMError):
    """Malformed or unreadable dataset."""
    exit_code = 2


class InvariantError(SpikeLSTMError):
    """A spike pipeline produced a value outside its binary range."""
    exit_code = 3


class NumericalError(SpikeLSTMError):
    """Non-finite loss, gradient or parameter."""
    exit_code = 3


class GradcheckError(SpikeLSTMError):
    """Hand-written gradients disagree with the reference engine."""
    exit_code = 4

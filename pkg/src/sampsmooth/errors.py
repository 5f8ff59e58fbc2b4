"""Exceptions raised by sampsmooth.

Numerical problems derive from :class:`NumericalError`, configuration problems from
:class:`ConfigError`. The command line maps them to distinct exit codes.
"""

import logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class SampsmoothError(Exception):
    """base class of every error raised on purpose by the package"""


class ConfigError(SampsmoothError, ValueError):
    """invalid experiment configuration; the message names the field"""


class NumericalError(SampsmoothError, ArithmeticError):
    """a computation could not deliver a trustworthy value"""


class EvaluationError(NumericalError):
    pass


class SeparationError(NumericalError):
    pass


class KadecBoundError(NumericalError):
    pass


class CoverageError(NumericalError):
    pass


class ResolutionError(NumericalError):
    pass


class DerivativeResolutionError(NumericalError):
    pass


class IllConditionedError(NumericalError):
    pass


class DegenerateFitError(NumericalError):
    pass


class PreconditionError(NumericalError):
    pass


class ToleranceError(NumericalError):
    """quadrature did not converge; ``residual`` holds the last disagreement"""

    def __init__(self, msg, residual=float("nan")):
        super().__init__(msg)
        self.residual = residual


def exit_code(exc):
    """exit status of the command line for an exception raised during a run"""
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    return EXIT_NUMERICAL

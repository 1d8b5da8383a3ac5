"""Exception hierarchy for cmqop.

Everything numerical that can fail in a *meaningful* way gets its own type so
callers (and the CLI) can distinguish bad configuration from genuine numeric
breakdown.
"""


class CmqopError(Exception):
    """Base class for all package errors."""


class ConfigError(CmqopError):
    """Invalid experiment configuration (maps to CLI exit code 2)."""


class NumericsError(CmqopError):
    """Base class for numeric failures (maps to CLI exit code 3)."""


class GammaPoleError(NumericsError):
    """Gamma function evaluated at (or too close to) a nonpositive integer."""


class IrregularParameterError(NumericsError):
    """Spectral parameter with coincident (or resonant) components."""


class ResonantParameterError(NumericsError):
    """A series recursion denominator (chi,chi)+2(chi,xi) is numerically zero."""

    def __init__(self, message, weight=None, denominator=None):
        super().__init__(message)
        self.weight = weight
        self.denominator = denominator


class WallCollisionError(NumericsError):
    """Chamber point with a coordinate gap below the strictness tolerance."""


class ConvergenceGuardError(NumericsError):
    """Evaluation point outside a series' guaranteed convergence region."""


class DivergenceAlarmError(NumericsError):
    """Partial sums of a chamber series grew over several consecutive degrees."""


class ToleranceError(NumericsError):
    """Requested tolerance unreachable within the degree/term budget.

    Carries the best value achieved and its tail estimate so callers doing
    quadrature can still use the value while accounting for the error.
    """

    def __init__(self, message, best=None, tail=None, degree=None):
        super().__init__(message)
        self.best = best
        self.tail = tail
        self.degree = degree


class GridError(CmqopError):
    """Invalid quadrature grid (empty, mismatched, or over the memory guard)."""

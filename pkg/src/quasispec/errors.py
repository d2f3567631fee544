"""Exception hierarchy shared by all quasispec modules."""

from __future__ import annotations


class QuasispecError(Exception):
    """Base class for every error raised by quasispec."""


class ConstructionError(QuasispecError):
    """A function could not be sampled (non-finite values, bad callable)."""


class UnresolvedFunctionError(ConstructionError):
    """Adaptive construction hit the per-piece degree cap."""


class DomainError(QuasispecError, ValueError):
    """Invalid interval, point outside a domain, or mismatched domains."""


class ShapeError(QuasispecError, ValueError):
    """Inconsistent widths, lengths or block sizes."""


class SolverError(QuasispecError):
    """A dense or structured solve broke down."""


class SingularSystemError(SolverError):
    """The assembled least-squares system is numerically rank deficient."""


class IllPosedTLSError(SolverError):
    """The total-least-squares gap condition fails; no unique minimizer."""


class ProblemFileError(QuasispecError):
    """A problem description file could not be parsed or validated.

    ``line`` is the offending line when known; it is also prefixed to the message.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class NoEigenpairError(QuasispecError):
    """No eigenpair passed the residual filter."""

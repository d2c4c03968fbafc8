"""Structured solver errors.

Every failure mode a solver can report carries a stable ``label`` that the
CLI prints verbatim, so scripts can match on it without parsing prose.
"""

from __future__ import annotations


class SortwaveError(Exception):
    """Base class for all structured solver errors."""

    label = "solver error"


class SingularSystemError(SortwaveError):
    """Tridiagonal solve hit a zero pivot / exactly singular matrix."""

    label = "singular system"


class ConvergenceError(SortwaveError):
    """Iterative eigensolver failed to converge within the iteration cap."""

    label = "no convergence"

    def __init__(self, message: str, iterations: int):
        super().__init__(message)
        self.iterations = iterations


class BracketError(SortwaveError):
    """Minimum stayed on a bracket endpoint after the maximum number of expansions."""

    label = "bracket expansion failed"


class InvalidModeError(SortwaveError):
    """A dispersion mode violates its invariants (e.g. non-positive entries)."""

    label = "invalid mode"


class PositivityError(SortwaveError):
    """Simulated density went negative beyond the clamping tolerance."""

    label = "positivity violated"


class DomainExhaustedError(SortwaveError):
    """Front reached the right edge of the computational window."""

    label = "domain exhausted"


class FrontNotFoundError(SortwaveError):
    """No down-crossing of the tracking threshold inside the domain."""

    label = "front not in domain"


class FitError(SortwaveError):
    """Power-law fit window holds too few usable samples."""

    label = "fit window too small"


class OutsideSupportError(SortwaveError):
    """Requested trait value lies outside the support of the nullset curve."""

    label = "outside support"


class LeftDomainError(SortwaveError):
    """A characteristic trajectory left the admissible half-space theta >= 0."""

    label = "left domain"


class CFLError(SortwaveError):
    """Requested time step violates the CFL stability bound."""

    label = "cfl violation"


class DegenerateOracleError(SortwaveError):
    """Phase oracle returned a non-concave trait profile where a maximum is required."""

    label = "degenerate oracle"


class BoundarySelectionError(SortwaveError):
    """Trait selection hit the grid boundary instead of an interior maximum."""

    label = "selection at boundary"


class GradientBlowupError(SortwaveError):
    """Selected-trait gradient exceeded the shock guard threshold."""

    label = "gradient blow-up"

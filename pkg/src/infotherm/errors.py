"""Exception hierarchy for the infotherm package.

Every domain failure raises a subclass of :class:`InfothermError`, so callers
can catch the package root without swallowing programming errors such as
``TypeError``.  The leaf classes are deliberately fine-grained: numerical
drivers (and the CLI) branch on them to decide between "input is malformed"
and "the requested object does not exist".
"""

from __future__ import annotations


class InfothermError(Exception):
    """Base class for all package-specific failures."""


class InvalidStateError(InfothermError):
    """A state, path, or parameter object violates its invariants."""


class InvalidConventionError(InvalidStateError):
    """Entropy-convention mismatch, e.g. mutual-information form without
    observation noise."""


class DegenerateStateError(InfothermError):
    """An operation hit a degenerate point (zero susceptibility)."""


class EfficiencyUndefinedError(InfothermError):
    """Estimation efficiency requested with zero observation noise."""


class AdmissibilityError(InfothermError):
    """A proposed estimator variance falls below the information bound."""


class NotACycleError(InvalidStateError):
    """A path that should close on itself does not."""


class InfeasibleProcessError(InfothermError):
    """A quasi-static process would leave the physical region."""


class InfeasibleBudgetError(InfothermError):
    """The requested acquisition cannot stay nonnegative under the budget."""

    def __init__(self, message: str, violation_start: float | None = None,
                 violation_end: float | None = None):
        super().__init__(message)
        self.violation_start = violation_start
        self.violation_end = violation_end


class NoFeasiblePathError(InfothermError):
    """Discrete search found no admissible path at all."""


class UndefinedRatioError(InfothermError):
    """Gain-to-work ratio requested on a cycle with zero net work."""


class NoStationaryDirectionError(InfothermError):
    """Stationary direction requested where every direction is equivalent."""


class NotClosedError(InfothermError):
    """A driven trajectory failed to settle onto a closed loop."""

    def __init__(self, message: str, gap: float | None = None):
        super().__init__(message)
        self.gap = gap


class NotSimpleLoopError(InvalidStateError):
    """A loop self-intersects where a simple curve is required."""


class NonMonotoneScalingError(InfothermError):
    """Cycle analysis requires a nondecreasing variance-versus-signal law."""


class DegenerateEnsembleError(InfothermError):
    """A Monte Carlo ensemble is too small or has no spread."""


class InsufficientDataError(InfothermError):
    """Too few usable records for the requested fit or check."""


class EmptyInputError(InsufficientDataError):
    """An ingest source contained no data rows at all."""


class InsufficientVariationError(InsufficientDataError):
    """Regression requested on a degenerate (constant) regressor."""

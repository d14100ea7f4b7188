"""Error taxonomy shared across the package.

Input problems raise ValueError subclasses, runtime problems RuntimeError
subclasses, so callers can catch by intent (`except ValueError` for bad
arguments) or by exact type.
"""


class HetcycleError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(HetcycleError, ValueError):
    """Invalid configuration file or CLI argument combination."""


class DomainError(HetcycleError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class InvariantViolation(HetcycleError, ValueError):
    """A structural invariant (chart bounds, branch sign, ...) is broken."""


class NotOnSection(HetcycleError, ValueError):
    """Ambient point does not lie on the requested cross-section wall."""


class UnsupportedForcing(HetcycleError, ValueError):
    """Closed-form path requested for a forcing without closed forms."""


class NonPositiveExit(HetcycleError, ValueError):
    """Local map image leaves through x <= 0: forcing pushed the orbit
    across the stable manifold (1 - K1 <= 0)."""


class IntermediateEscape(HetcycleError, ValueError):
    """A partial composition leaves the unit chart, so the next leg's
    preconditions fail."""


class NoPositiveFixedPoint(HetcycleError, ValueError):
    """h2 has no attracting fixed point of order mu near 0; occurs when
    h2(0) = mu (a - 1/(alpha-beta)) <= 0."""


class GridEmpty(HetcycleError, ValueError):
    """A sample grid contains no admissible points."""


class InsufficientData(HetcycleError, ValueError):
    """Too few usable samples to fit (degenerate regression)."""


class MaxTimeExceeded(HetcycleError, RuntimeError):
    """Integration reached max_time before the stopping event."""


class StepFailure(HetcycleError, RuntimeError):
    """The adaptive stepper could not meet its tolerances."""


class SequenceViolation(HetcycleError, RuntimeError):
    """Section crossings arrived out of the expected cyclic order."""


class QuadratureFailure(HetcycleError, RuntimeError):
    """Adaptive quadrature failed to converge to the requested tolerance."""


class NonConvergence(HetcycleError, RuntimeError):
    """An iterative solver (Newton, fixed-point iteration) did not converge."""

"""Exception types shared across the package."""


class RouteLogitError(Exception):
    """Base class for all package-specific errors."""


class ParseError(RouteLogitError):
    """Malformed network or observation file; message carries the line number."""


class SolveFailure(RouteLogitError):
    """The value-function linear system has no valid solution.

    Raised when the direct solve produces negative or non-finite entries,
    when value iteration diverges or fails to converge within its cap, or
    when the fixed-point residual check fails. On cyclic networks with
    large utilities this is the expected failure mode of the unconstrained
    model; the constrained model with strictly positive costs does not
    exhibit it.
    """


class PathOverflowError(RouteLogitError):
    """Path enumeration exceeded the caller-supplied path budget."""


class InfeasibleObservationError(RouteLogitError):
    """One or more observations receive probability exactly zero.

    Carries the offending observation indices so callers can inspect or
    filter the data instead of silently dropping records.
    """

    def __init__(self, indices, message=None):
        self.indices = list(indices)
        if message is None:
            message = (
                f"{len(self.indices)} observation(s) are infeasible under the "
                f"configured constraint (indices {self.indices[:20]}"
                f"{'...' if len(self.indices) > 20 else ''})"
            )
        super().__init__(message)


class StateSpaceCapError(RouteLogitError):
    """Extended state space exceeded the configured state cap."""


class SimulationError(RouteLogitError):
    """Sampling failed: hop cap exceeded, dead end, or rejection starvation."""

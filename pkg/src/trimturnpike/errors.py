"""Exception types shared across the package."""


class TrimTurnpikeError(Exception):
    """Base class for all package errors."""


class ShapeMismatch(TrimTurnpikeError):
    """A callback returned an array with unexpected dimensions."""


class NonSPDWeight(TrimTurnpikeError):
    """Control weight matrix is not symmetric positive definite."""


class EvaluatorFailure(TrimTurnpikeError):
    """A user callback raised or produced non-finite values."""


class SingularMatrix(TrimTurnpikeError):
    """LU pivot fell below the singularity threshold."""


class NoConvergence(TrimTurnpikeError):
    """Iterative eigenvalue computation did not converge."""


class StepFailure(TrimTurnpikeError):
    """Adaptive integrator step size underflowed."""


class BlowUp(TrimTurnpikeError):
    """State norm exceeded the blow-up threshold during integration."""


class GridTooCoarse(TrimTurnpikeError):
    """A time grid has too few nodes for the requested operation."""


class NewtonStagnation(TrimTurnpikeError):
    """Damped Newton line search underflowed before reaching tolerance."""


class SingularShootingJacobian(TrimTurnpikeError):
    """Shooting Jacobian is numerically singular."""


class SingularJacobian(TrimTurnpikeError):
    """Newton Jacobian of a static solve is numerically singular."""


class WindowEmpty(TrimTurnpikeError):
    """Envelope fit window is empty (horizon too short)."""


class DegenerateFit(TrimTurnpikeError):
    """All deviations are below the measurement floor (exact turnpike)."""


class LambdaMismatch(TrimTurnpikeError):
    """Steady point and solution carry different cyclic multipliers."""


class PoleProximity(TrimTurnpikeError):
    """Trajectory came too close to a pole of the dynamics."""


class RadiusCollapse(TrimTurnpikeError):
    """Orbital radius collapsed to (numerically) zero."""

"""Exception hierarchy for flowplan.

All library errors derive from FlowPlanError so callers can catch one type.
Input/validation errors and planning failures are distinguished because the
CLI maps them to different exit codes.
"""


class FlowPlanError(Exception):
    """Base class for all flowplan errors."""


class InputError(FlowPlanError, ValueError):
    """Malformed user input: scene files, grids, CLI arguments, configuration."""


class SceneValidationError(InputError):
    """Scene violates a structural invariant (non-convex region, bad adjacency)."""


class OutOfDomainError(FlowPlanError):
    """A queried point lies outside every region of the scene."""

    def __init__(self, point, message=None):
        self.point = point
        super().__init__(message or f"point {tuple(point)} is outside the scene domain")


class DomainViolationError(FlowPlanError):
    """A boundary parameter left its parameter domain.

    Carries the clamped parameter so chain repair can recover.
    """

    def __init__(self, lam, clamped, message=None):
        self.lam = lam
        self.clamped = clamped
        super().__init__(message or f"parameter {lam} outside the parameter domain")


class InvalidRerouteError(FlowPlanError):
    """Corner reroute requested between regions not adjacent at the corner."""


class AmbiguousRerouteError(FlowPlanError):
    """More than one boundary at the corner could be the offended one."""


class SingularInputError(FlowPlanError):
    """Segment data sits on a singular manifold (V equals flow speed, flow opposing)."""


class DegenerateInputError(FlowPlanError):
    """Cost inputs admit no minimizer (zero running cost in still water)."""


class PlanningFailureError(FlowPlanError):
    """No feasible chain was found in any optimization round."""

    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class PartitionError(InputError):
    """Flow-grid partitioning cannot proceed (degenerate features, empty class)."""


class BenchToleranceError(FlowPlanError):
    """A benchmark result fell outside its published tolerance."""

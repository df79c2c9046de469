"""Exception types shared across the workbench."""


class ReachBenchError(Exception):
    """Base class for all workbench errors."""


class NonFiniteInput(ReachBenchError):
    """A state or force contained NaN or infinity."""


class DegenerateGradient(ReachBenchError):
    """Distance gradient requested at zero distance (point on the obstacle)."""


class CollisionState(ReachBenchError):
    """Field evaluation requested at zero obstacle distance."""


class NonPositiveStiffness(ReachBenchError):
    """Gain law produced K <= 0."""


class NegativeDamping(ReachBenchError):
    """Gain law produced D < 0."""


class ZeroObstacleDistance(ReachBenchError):
    """Field law evaluated at obstacle distance o <= 0."""


class BetaOutOfRange(ReachBenchError):
    """Field law produced an exponent <= 1."""


class PlanCollision(ReachBenchError):
    """A planned trajectory swept through the obstacle."""


class TrajectoryTooShort(ReachBenchError):
    """Recorded trial too short to identify parameters from."""


class FitDiverged(ReachBenchError):
    """Simplex search exhausted its budget without converging."""


class CollidedTrialRejected(ReachBenchError):
    """Field identification rejects trials that hit the obstacle."""


class InsufficientConditions(ReachBenchError):
    """Regression needs more distinct task conditions than were supplied."""


class UnbalancedConfig(ReachBenchError):
    """Session layout cannot balance the 9 task conditions."""


class SessionComplete(ReachBenchError):
    """Signal: the session has no trials left to run (not a failure)."""


class EmptySession(ReachBenchError):
    """Summary requested over zero trial records."""


class NonPositiveWidth(ReachBenchError):
    """Index of difficulty needs a positive target width."""


class NonPositiveMT(ReachBenchError):
    """Index of performance needs a positive movement time."""


class BadWeights(ReachBenchError):
    """TLX weights must be six non-negative integers summing to 15."""


class TrialLogError(ReachBenchError):
    """Trial log unreadable (truncated, malformed, or missing parts)."""


class SchemaVersionMismatch(TrialLogError):
    """Trial log carries an unknown schema version."""


class BindFailure(ReachBenchError):
    """Service endpoint could not be bound."""


class ClientDisconnected(ReachBenchError):
    """The driving client dropped; session paused until reconnect."""

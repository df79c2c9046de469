"""reachbench: collaborative reaching workbench.

Human-style obstacle-avoidance movement generation, per-person parameter
identification, a leader/follower virtual robot partner, the full reaching
trial protocol, pointing-task analytics, and a realtime session service.
"""

from .avoidance import (
    DEFAULT_FIELD_LAWS,
    DEFAULT_GAIN_LAWS,
    DmpParams,
    FieldLawCoeffs,
    FieldParams,
    GainLawCoeffs,
    PersonModel,
    PlannedTrajectory,
    beta_from_obstacle,
    damping_from_id,
    dmp_accel,
    field_accel,
    lambda_from_obstacle,
    plan_trajectory,
    stiffness_from_id,
)
from .estimator import ObstacleAvoidancePlanner
from .fitting import (
    FitReport,
    RecordedTrial,
    fit_dmp_trial,
    fit_field_trial,
    identify_person_model,
    regress_field_laws,
    regress_gain_laws,
)
from .geometry import Obstacle, Vec2, distance_gradient, segment_distance, swept_collision
from .metrics import (
    SessionSummary,
    TlxResponse,
    TrialRecord,
    index_of_difficulty,
    index_of_performance,
    summarize_session,
    tlx_total,
)
from .partner import (
    PartnerState,
    RobotPartner,
    RobotPartnerConfig,
    Role,
    retarget,
    robot_force,
    role_coefficient,
)
from .plant import BodyState, PlantParams, step_plant
from .trials import SessionConfig, TrialOutcome, TrialPhase, TrialSpec, generate_session
from .engine import Session, SimHuman, SimHumanParams, sim_human_force

__version__ = "0.1.0"

__all__ = [
    "BodyState",
    "DmpParams",
    "DEFAULT_FIELD_LAWS",
    "DEFAULT_GAIN_LAWS",
    "FieldLawCoeffs",
    "FieldParams",
    "FitReport",
    "GainLawCoeffs",
    "Obstacle",
    "ObstacleAvoidancePlanner",
    "PartnerState",
    "PersonModel",
    "PlannedTrajectory",
    "PlantParams",
    "RecordedTrial",
    "RobotPartner",
    "RobotPartnerConfig",
    "Role",
    "Session",
    "SessionConfig",
    "SessionSummary",
    "SimHuman",
    "SimHumanParams",
    "TlxResponse",
    "TrialOutcome",
    "TrialPhase",
    "TrialRecord",
    "TrialSpec",
    "Vec2",
    "beta_from_obstacle",
    "damping_from_id",
    "distance_gradient",
    "dmp_accel",
    "field_accel",
    "fit_dmp_trial",
    "fit_field_trial",
    "generate_session",
    "identify_person_model",
    "index_of_difficulty",
    "index_of_performance",
    "lambda_from_obstacle",
    "plan_trajectory",
    "regress_field_laws",
    "regress_gain_laws",
    "retarget",
    "robot_force",
    "role_coefficient",
    "segment_distance",
    "sim_human_force",
    "step_plant",
    "stiffness_from_id",
    "summarize_session",
    "swept_collision",
    "tlx_total",
]

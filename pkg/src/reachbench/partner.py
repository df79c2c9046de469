"""The virtual robot partner: a PD servo toward the avoidance model's planned
movement, scaled by the leader-follower coefficient.

Sign convention, deliberately: the servo error is reference minus state,
F_r = K_l * (K_p*(p_t - p) + K_d*(v_t - v)) with positive gains. The
opposite orientation (state minus reference, positive gains) repels from the
reference and could never perform the task alone.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .avoidance import (
    DEFAULT_PLAN_HORIZON,
    PersonModel,
    PlannedTrajectory,
    plan_trajectory,
)
from .errors import PlanCollision
from .geometry import Vec2, clamp_magnitude
from .plant import BodyState
from .trials import TrialSpec

log = logging.getLogger(__name__)


class Role(Enum):
    FOLLOWER = "follower"
    EQUAL = "equal"
    LEADER = "leader"


_ROLE_COEFF = {Role.FOLLOWER: 0.75, Role.EQUAL: 1.0, Role.LEADER: 1.25}


def role_coefficient(role: Role) -> float:
    """Leader-follower scale K_l: follower 0.75, equal 1.0, leader 1.25."""
    return _ROLE_COEFF[role]


@dataclass(frozen=True)
class RobotPartnerConfig:
    kp: float = 100.0         # N/m
    kd: float = 20.0          # N*s/m
    role: Role = Role.EQUAL
    force_cap: float = 60.0   # N
    plan_horizon: float = DEFAULT_PLAN_HORIZON

    def __post_init__(self):
        if self.kp <= 0 or self.force_cap <= 0:
            raise ValueError("kp and force_cap must be positive")
        if self.kd < 0:
            raise ValueError("kd must be non-negative")


@dataclass
class PartnerState:
    plan: Optional[PlannedTrajectory] = None
    plan_clock: float = 0.0  # s since plan start


def retarget(
    partner: PartnerState,
    trial: TrialSpec,
    person_model: PersonModel,
    now: float,
    horizon: float = DEFAULT_PLAN_HORIZON,
) -> PartnerState:
    """Fresh plan for a newly visible target, using the person's fitted laws.

    Planning is deterministic, so retargeting the same trial twice yields the
    identical plan. If the plan itself would collide, the failure is reported
    as a diagnostic and the partner falls back to zero force (no plan).
    """
    del now  # plan playback is clock-indexed from its own start
    try:
        plan = plan_trajectory(
            trial,
            person_model.gain_laws,
            person_model.field_laws,
            tau=person_model.tau,
            horizon=horizon,
        )
    except PlanCollision as exc:
        log.warning("retarget for trial %d failed: %s", trial.trial_id, exc)
        return PartnerState(plan=None, plan_clock=0.0)
    return PartnerState(plan=plan, plan_clock=0.0)


def robot_force(partner: PartnerState, point: BodyState, cfg: RobotPartnerConfig) -> Vec2:
    """Servo force toward the plan sample at the partner's clock.

    F_r = K_l * (K_p*(p_t - p) + K_d*(v_t - v)), clamped to the force cap;
    zero when no plan exists. The last plan sample is held after the horizon.
    """
    if partner.plan is None:
        return Vec2(0.0, 0.0)
    ref_p, ref_v = partner.plan.sample_at(partner.plan_clock)
    kl = role_coefficient(cfg.role)
    fx = kl * (cfg.kp * (ref_p.x - point.position.x) + cfg.kd * (ref_v.x - point.velocity.x))
    fy = kl * (cfg.kp * (ref_p.y - point.position.y) + cfg.kd * (ref_v.y - point.velocity.y))
    fx, fy = clamp_magnitude(fx, fy, cfg.force_cap)
    return Vec2(fx, fy)


class RobotPartner:
    """Stateful wrapper used by the session engine: owns config, person model,
    a plan cache keyed by trial geometry, and the running plan clock."""

    def __init__(self, cfg: RobotPartnerConfig, person_model: PersonModel):
        self.cfg = cfg
        self.person_model = person_model
        self.state = PartnerState()
        self._plan_cache: dict[tuple, PlannedTrajectory] = {}

    def on_target(self, trial: TrialSpec, now: float) -> None:
        key = (
            trial.start,
            trial.target_center,
            trial.target_width,
            trial.obstacle,
        )
        cached = self._plan_cache.get(key)
        if cached is not None:
            self.state = PartnerState(plan=cached, plan_clock=0.0)
            return
        self.state = retarget(self.state, trial, self.person_model, now, self.cfg.plan_horizon)
        if self.state.plan is not None:
            self._plan_cache[key] = self.state.plan

    def on_trial_end(self) -> None:
        self.state = PartnerState()

    def advance(self, dt: float) -> None:
        if self.state.plan is not None:
            self.state.plan_clock += dt

    def force(self, point: BodyState) -> Vec2:
        return robot_force(self.state, point, self.cfg)

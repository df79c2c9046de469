"""Trial and session specifications plus the balanced session generator.

A session is a seeded random ordering of the 9 task conditions (3 target
distances x 3 target sizes), each repeated trials/9 times. Obstacles, when
enabled, are thin segments perpendicular to the start-target line, centered
midway between the start and the target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .errors import UnbalancedConfig
from .geometry import Obstacle, Vec2
from .metrics import index_of_difficulty

TARGET_DISTANCES = (0.05, 0.15, 0.25)  # m
SIZE_CLASSES = ("small", "medium", "large")
DEFAULT_WIDTHS = {"small": 0.01, "medium": 0.02, "large": 0.03}  # target diameters, m
OBSTACLE_LENGTH = 0.04  # m

MODES = ("individual", "robot_follower", "robot_equal", "robot_leader", "human_pair_replay")


class TrialPhase(Enum):
    AT_START = "at_start"
    TARGET_SHOWN = "target_shown"
    MOVING = "moving"
    DWELLING = "dwelling"
    SUCCESS = "success"
    FAILED_COLLISION = "failed_collision"
    RETURNING = "returning"


# Legal phase transitions; dwelling may revert to moving when the point
# exits the target before the dwell completes.
LEGAL_TRANSITIONS: dict[TrialPhase, frozenset[TrialPhase]] = {
    TrialPhase.AT_START: frozenset({TrialPhase.TARGET_SHOWN}),
    TrialPhase.TARGET_SHOWN: frozenset({TrialPhase.MOVING}),
    TrialPhase.MOVING: frozenset({TrialPhase.DWELLING, TrialPhase.FAILED_COLLISION}),
    TrialPhase.DWELLING: frozenset(
        {TrialPhase.SUCCESS, TrialPhase.MOVING, TrialPhase.FAILED_COLLISION}
    ),
    TrialPhase.SUCCESS: frozenset({TrialPhase.RETURNING}),
    TrialPhase.FAILED_COLLISION: frozenset({TrialPhase.RETURNING}),
    TrialPhase.RETURNING: frozenset({TrialPhase.AT_START}),
}


@dataclass(frozen=True)
class TrialSpec:
    trial_id: int
    start: Vec2
    target_center: Vec2
    target_distance: float   # m, one of TARGET_DISTANCES for generated trials
    target_width: float      # m, target diameter
    size_class: str
    obstacle: Optional[Obstacle]
    id_bits: float

    def target_radius(self) -> float:
        return 0.5 * self.target_width

    def inside_target(self, p: Vec2) -> bool:
        return math.hypot(p.x - self.target_center.x, p.y - self.target_center.y) <= self.target_radius()


@dataclass
class TrialOutcome:
    success: bool
    collided: bool
    movement_time: Optional[float]  # s, present iff success
    path: list[tuple[float, float, float, float, float, float, float, float, float]] = field(
        default_factory=list, repr=False
    )  # rows (t, x, y, vx, vy, fhx, fhy, frx, fry)

    def __post_init__(self):
        if self.success and self.collided:
            raise ValueError("success and collided are mutually exclusive")
        if self.success != (self.movement_time is not None):
            raise ValueError("movement_time must be present exactly for successes")


@dataclass(frozen=True)
class SessionConfig:
    mode: str = "individual"
    trials_per_session: int = 45
    dwell_time: float = 0.5          # s the point must stay inside the target
    start_radius: float = 0.01       # m tolerance for "at the start position"
    seed: int = 0
    obstacle_enabled: bool = False
    widths: dict = field(default_factory=lambda: dict(DEFAULT_WIDTHS))
    start: Vec2 = Vec2(0.0, 0.0)
    direction: Vec2 = Vec2(1.0, 0.0)  # unit axis from start toward targets

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}, expected one of {MODES}")
        if self.trials_per_session <= 0 or self.trials_per_session % 9 != 0:
            raise UnbalancedConfig(
                f"trials_per_session must be a positive multiple of 9 to balance the "
                f"3x3 conditions, got {self.trials_per_session}"
            )
        if self.dwell_time <= 0 or self.start_radius <= 0:
            raise ValueError("dwell_time and start_radius must be positive")
        if set(self.widths) != set(SIZE_CLASSES):
            raise ValueError(f"widths must cover exactly {SIZE_CLASSES}")
        if abs(self.direction.norm() - 1.0) > 1e-9:
            raise ValueError("direction must be a unit vector")


def make_obstacle_for(start: Vec2, direction: Vec2, target_distance: float) -> Obstacle:
    """Obstacle segment perpendicular to the reach axis, centered midway."""
    mid = Vec2(
        start.x + direction.x * target_distance / 2.0,
        start.y + direction.y * target_distance / 2.0,
    )
    half = OBSTACLE_LENGTH / 2.0
    perp = Vec2(-direction.y, direction.x)
    return Obstacle(
        Vec2(mid.x - perp.x * half, mid.y - perp.y * half),
        Vec2(mid.x + perp.x * half, mid.y + perp.y * half),
    )


def make_trial(
    trial_id: int,
    cfg: SessionConfig,
    target_distance: float,
    size_class: str,
    with_obstacle: Optional[bool] = None,
) -> TrialSpec:
    width = cfg.widths[size_class]
    center = Vec2(
        cfg.start.x + cfg.direction.x * target_distance,
        cfg.start.y + cfg.direction.y * target_distance,
    )
    obstacle = None
    if cfg.obstacle_enabled if with_obstacle is None else with_obstacle:
        obstacle = make_obstacle_for(cfg.start, cfg.direction, target_distance)
    return TrialSpec(
        trial_id=trial_id,
        start=cfg.start,
        target_center=center,
        target_distance=target_distance,
        target_width=width,
        size_class=size_class,
        obstacle=obstacle,
        id_bits=index_of_difficulty(target_distance, width),
    )


def generate_session(cfg: SessionConfig) -> list[TrialSpec]:
    """Balanced, seeded trial order: each of the 9 conditions appears exactly
    trials_per_session/9 times; same seed, same order."""
    reps = cfg.trials_per_session // 9
    conditions = [(d, s) for d in TARGET_DISTANCES for s in SIZE_CLASSES] * reps
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    order = rng.permutation(len(conditions))
    return [
        make_trial(i, cfg, conditions[j][0], conditions[j][1]) for i, j in enumerate(order)
    ]


def evaluation_set_order(seed: int) -> list[str]:
    """Order of the four evaluation sets: individual always first (its data
    builds the partner model), the three robot sets counterbalanced by seed."""
    robot_modes = ["robot_follower", "robot_equal", "robot_leader"]
    rng = np.random.Generator(np.random.PCG64(seed))
    return ["individual"] + [robot_modes[i] for i in rng.permutation(3)]

"""Point-mass plant driven by the summed human and robot forces.

Stands in for the haptic interface's virtual dynamic model: a unit point
mass with viscous damping, integrated with fixed-step semi-implicit Euler
(deterministic, stable for the stiff servo springs that drive it).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import NonFiniteInput
from .geometry import Vec2


class BodyState(NamedTuple):
    position: Vec2
    velocity: Vec2
    time: float


@dataclass(frozen=True)
class PlantParams:
    mass: float = 1.0            # kg
    viscous_damping: float = 10.0  # N*s/m
    force_cap: float = 60.0      # N
    dt: float = 0.001            # s

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if self.viscous_damping < 0:
            raise ValueError("viscous damping must be non-negative")
        if self.force_cap <= 0:
            raise ValueError("force cap must be positive")
        if not 0 < self.dt <= 0.01:
            raise ValueError("dt must be in (0, 0.01] s for stable fixed-step integration")


def body_at(x: float, y: float, vx: float = 0.0, vy: float = 0.0, t: float = 0.0) -> BodyState:
    return BodyState(Vec2(x, y), Vec2(vx, vy), t)


def step_plant(state: BodyState, total_force: Vec2, params: PlantParams) -> BodyState:
    """One semi-implicit Euler step of m*a = F - b*v.

    The caller has already summed F = F_r + F_h and clamped it to the force
    cap. Same inputs give bit-identical output.
    """
    fx, fy = total_force
    if not (math.isfinite(fx) and math.isfinite(fy)):
        raise NonFiniteInput(f"force is not finite: {total_force}")
    px, py = state.position
    vx, vy = state.velocity
    if not (math.isfinite(px) and math.isfinite(py) and math.isfinite(vx) and math.isfinite(vy)):
        raise NonFiniteInput(f"state is not finite: {state}")

    dt = params.dt
    inv_m = 1.0 / params.mass
    b = params.viscous_damping
    vx = vx + dt * (fx - b * vx) * inv_m
    vy = vy + dt * (fy - b * vy) * inv_m
    return BodyState(
        Vec2(px + dt * vx, py + dt * vy),
        Vec2(vx, vy),
        state.time + dt,
    )

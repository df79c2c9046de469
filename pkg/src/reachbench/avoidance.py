"""Goal-directed movement generation with obstacle avoidance.

The movement model is a linear point-attractor system

    tau * v' = K * (g - x) - D * v + phi(x, v)
    tau * x' = v

whose gains follow the target's index of difficulty (K = k1*ID + k2,
D = k3*ID), coupled to a dynamic repulsive field around the obstacle.
The coupling term phi is the negative spatial gradient of

    U(x, v) = lambda * (-cos(theta))^beta * ||v|| / p

where p is the distance to the obstacle, theta the angle between the
velocity and the direction away from the obstacle (cos(theta) =
v . grad(p) / ||v||), and the field's strength/shape follow the obstacle's
distance from the start (lambda = l1/o + l2, beta = b3*o^2 + b4*o + b5).

Conventions pinned here:
  * cos(theta) is built from the unit distance gradient, so the field is
    active only while moving toward the obstacle (cos(theta) < 0), which is
    the only convention that keeps the base (-cos(theta)) positive while
    repelling approach.
  * grad(cos(theta)) treats the nearest segment point as locally constant;
    exact over the segment's face region, approximate at its endpoints.
  * Everything is applied componentwise in 2D with shared scalar gains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np
from scipy.linalg import expm

from .errors import (
    BetaOutOfRange,
    CollisionState,
    NegativeDamping,
    NonPositiveStiffness,
    PlanCollision,
    ZeroObstacleDistance,
)
from .geometry import Obstacle, Vec2, segment_distance, swept_collision
from .plant import BodyState

if TYPE_CHECKING:
    from .trials import TrialSpec

# Task-wide validity ranges for the coefficient laws (bits, meters).
DEFAULT_ID_RANGE = (1.0, 5.0)
DEFAULT_O_RANGE = (0.02, 0.13)

# Guards around the p -> 0 singularity of the field.
DEFAULT_FIELD_CUTOFF = 0.1   # m; field inactive beyond this distance
DEFAULT_ACCEL_CAP = 50.0     # m/s^2; field magnitude clamp

# One-time lateral velocity injected when the field first activates. The
# generated task geometry is exactly mirror-symmetric about the start-target
# axis, which makes that axis an invariant manifold of the model: without a
# tie-breaker no plan could ever detour around the obstacle. Human data
# carries this asymmetry naturally; the planner supplies it explicitly.
DEFAULT_DETOUR_SEED = 0.01   # m/s
DEFAULT_DETOUR_SIDE = 1.0    # +1 = counterclockwise of the motion direction

DEFAULT_PLAN_HORIZON = 4.5   # s


@dataclass(frozen=True)
class DmpParams:
    spring_k: float          # 1/s^2
    damping_d: float         # 1/s
    tau: float = 1.0         # s

    def __post_init__(self):
        if self.spring_k <= 0:
            raise NonPositiveStiffness(f"K must be positive, got {self.spring_k}")
        if self.damping_d < 0:
            raise NegativeDamping(f"D must be non-negative, got {self.damping_d}")
        if self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau}")


@dataclass(frozen=True)
class GainLawCoeffs:
    """Coefficients of K = k1*ID + k2 and D = k3*ID.

    Validity is checked over the task's ID range at construction (affine and
    linear laws: endpoint checks suffice).
    """

    k1: float  # 1/s^2 per bit
    k2: float  # 1/s^2
    k3: float  # 1/s per bit

    def __post_init__(self):
        lo, hi = DEFAULT_ID_RANGE
        for idb in (lo, hi):
            if self.k1 * idb + self.k2 <= 0:
                raise NonPositiveStiffness(
                    f"K(ID={idb}) = {self.k1 * idb + self.k2} <= 0 over the task ID range"
                )
            if self.k3 * idb < 0:
                raise NegativeDamping(f"D(ID={idb}) = {self.k3 * idb} < 0 over the task ID range")


@dataclass(frozen=True)
class FieldParams:
    strength: float                       # lambda
    exponent: float                       # beta, > 1
    cutoff: float = DEFAULT_FIELD_CUTOFF  # m
    accel_cap: float = DEFAULT_ACCEL_CAP  # m/s^2

    def __post_init__(self):
        if self.strength < 0:
            raise ValueError(f"field strength must be non-negative, got {self.strength}")
        if self.exponent <= 1:
            raise BetaOutOfRange(
                f"beta must exceed 1 for continuity at the activation boundary, got {self.exponent}"
            )
        if self.cutoff <= 0 or self.accel_cap <= 0:
            raise ValueError("cutoff and accel_cap must be positive")


@dataclass(frozen=True)
class FieldLawCoeffs:
    """Coefficients of lambda = l1/o + l2 and beta = b3*o^2 + b4*o + b5,
    named l*/b* to keep them apart from the gain-law coefficients."""

    l1: float  # lambda * m
    l2: float  # lambda units
    b3: float  # 1/m^2
    b4: float  # 1/m
    b5: float  # dimensionless

    def __post_init__(self):
        lo, hi = DEFAULT_O_RANGE
        # lambda(o) = l1/o + l2 is monotone in o, so endpoints suffice.
        for o in (lo, hi):
            if self.l1 / o + self.l2 < 0:
                raise ValueError(f"lambda(o={o}) < 0 over the task obstacle range")
        # beta(o) is quadratic: check endpoints plus an interior vertex.
        betas = [self.b3 * o * o + self.b4 * o + self.b5 for o in (lo, hi)]
        if self.b3 != 0:
            vertex = -self.b4 / (2 * self.b3)
            if lo < vertex < hi:
                betas.append(self.b3 * vertex * vertex + self.b4 * vertex + self.b5)
        if min(betas) <= 1:
            raise BetaOutOfRange(f"beta(o) = {min(betas)} <= 1 over the task obstacle range")


# Artifact defaults; tuned for human-scale reach times over the 9 task
# conditions and detours about twice the obstacle half-length.
DEFAULT_GAIN_LAWS = GainLawCoeffs(k1=4.0, k2=16.0, k3=4.0)
DEFAULT_FIELD_LAWS = FieldLawCoeffs(l1=0.002, l2=0.01, b3=40.0, b4=-14.0, b5=4.2)


@dataclass(frozen=True)
class PersonModel:
    """A person's identified movement model: gain laws, field laws, timescale."""

    gain_laws: GainLawCoeffs = DEFAULT_GAIN_LAWS
    field_laws: Optional[FieldLawCoeffs] = DEFAULT_FIELD_LAWS
    tau: float = 1.0

    def to_dict(self) -> dict:
        d = {
            "gain_laws": {"k1": self.gain_laws.k1, "k2": self.gain_laws.k2, "k3": self.gain_laws.k3},
            "tau": self.tau,
        }
        if self.field_laws is not None:
            f = self.field_laws
            d["field_laws"] = {"l1": f.l1, "l2": f.l2, "b3": f.b3, "b4": f.b4, "b5": f.b5}
        else:
            d["field_laws"] = None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PersonModel":
        g = d["gain_laws"]
        fl = d.get("field_laws")
        return cls(
            gain_laws=GainLawCoeffs(g["k1"], g["k2"], g["k3"]),
            field_laws=FieldLawCoeffs(fl["l1"], fl["l2"], fl["b3"], fl["b4"], fl["b5"])
            if fl
            else None,
            tau=d.get("tau", 1.0),
        )


def stiffness_from_id(id_bits: float, coeffs: GainLawCoeffs) -> float:
    """K for a target of the given index of difficulty."""
    if id_bits < 0:
        raise ValueError(f"index of difficulty must be non-negative, got {id_bits}")
    k = coeffs.k1 * id_bits + coeffs.k2
    if k <= 0:
        raise NonPositiveStiffness(f"K(ID={id_bits}) = {k}")
    return k


def damping_from_id(id_bits: float, coeffs: GainLawCoeffs) -> float:
    """D for a target of the given index of difficulty."""
    if id_bits < 0:
        raise ValueError(f"index of difficulty must be non-negative, got {id_bits}")
    d = coeffs.k3 * id_bits
    if d < 0:
        raise NegativeDamping(f"D(ID={id_bits}) = {d}")
    return d


def lambda_from_obstacle(o: float, coeffs: FieldLawCoeffs) -> float:
    """Field strength for an obstacle at distance ``o`` from the start."""
    if o <= 0:
        raise ZeroObstacleDistance(f"obstacle distance must be positive, got {o}")
    return coeffs.l1 / o + coeffs.l2


def beta_from_obstacle(o: float, coeffs: FieldLawCoeffs) -> float:
    """Field exponent for an obstacle at distance ``o`` from the start."""
    if o <= 0:
        raise ZeroObstacleDistance(f"obstacle distance must be positive, got {o}")
    b = coeffs.b3 * o * o + coeffs.b4 * o + coeffs.b5
    if b <= 1:
        raise BetaOutOfRange(f"beta(o={o}) = {b} <= 1")
    return b


def dmp_params_for(id_bits: float, coeffs: GainLawCoeffs, tau: float = 1.0) -> DmpParams:
    return DmpParams(stiffness_from_id(id_bits, coeffs), damping_from_id(id_bits, coeffs), tau)


def field_params_for(
    o: float,
    coeffs: FieldLawCoeffs,
    cutoff: float = DEFAULT_FIELD_CUTOFF,
    accel_cap: float = DEFAULT_ACCEL_CAP,
) -> FieldParams:
    return FieldParams(
        lambda_from_obstacle(o, coeffs), beta_from_obstacle(o, coeffs), cutoff, accel_cap
    )


def dmp_accel(state: BodyState, goal: Vec2, params: DmpParams) -> Vec2:
    """v' of the point attractor: (K*(g - x) - D*v) / tau, componentwise."""
    k, d, tau = params.spring_k, params.damping_d, params.tau
    return Vec2(
        (k * (goal.x - state.position.x) - d * state.velocity.x) / tau,
        (k * (goal.y - state.position.y) - d * state.velocity.y) / tau,
    )


def field_accel(state: BodyState, obstacle: Obstacle, field: FieldParams) -> Vec2:
    """Repellent acceleration of the dynamic potential field.

    Zero when at rest, moving away from the obstacle, or beyond the cutoff
    distance; magnitude clamped to the acceleration cap. Raises
    CollisionState at zero obstacle distance.
    """
    p, closest = segment_distance(state.position, obstacle)
    if p == 0.0:
        raise CollisionState(f"point {state.position} is on the obstacle")
    ax, ay = _field_accel_raw(
        state.position.x,
        state.position.y,
        state.velocity.x,
        state.velocity.y,
        p,
        closest.x,
        closest.y,
        field.strength,
        field.exponent,
        field.cutoff,
        field.accel_cap,
    )
    return Vec2(ax, ay)


def _field_accel_raw(
    px: float,
    py: float,
    vx: float,
    vy: float,
    p: float,
    cx: float,
    cy: float,
    lam: float,
    beta: float,
    cutoff: float,
    accel_cap: float,
) -> tuple[float, float]:
    """Scalar core of field_accel; the caller supplies the distance query."""
    if lam == 0.0 or p >= cutoff:
        return 0.0, 0.0
    speed = math.hypot(vx, vy)
    if speed == 0.0:
        return 0.0, 0.0
    gx = (px - cx) / p  # unit distance gradient (away from the obstacle)
    gy = (py - cy) / p
    cos_t = (vx * gx + vy * gy) / speed
    if cos_t >= 0.0:
        return 0.0, 0.0
    # grad cos(theta) with the closest point held fixed.
    dcx = vx / (speed * p) - cos_t * gx / p
    dcy = vy / (speed * p) - cos_t * gy / p
    coef = lam * (-cos_t) ** (beta - 1.0) * speed / p
    fx = coef * (beta * dcx - cos_t * gx / p)
    fy = coef * (beta * dcy - cos_t * gy / p)
    mag = math.hypot(fx, fy)
    if mag > accel_cap:
        s = accel_cap / mag
        fx *= s
        fy *= s
    return fx, fy


@dataclass(frozen=True)
class PlannedTrajectory:
    """Time-indexed reference movement at the plant's step size.

    ``positions[i]``/``velocities[i]`` are the desired point position and
    world velocity at time ``i * dt``; the first sample is the trial start at
    rest.
    """

    positions: np.ndarray   # (n, 2) m
    velocities: np.ndarray  # (n, 2) m/s
    dt: float
    horizon: float

    def __len__(self) -> int:
        return len(self.positions)

    def sample_at(self, clock: float) -> tuple[Vec2, Vec2]:
        """Reference (position, velocity) at ``clock`` seconds from plan start.

        The final sample is held past the horizon, turning the tracking servo
        into a goal spring.
        """
        i = int(round(clock / self.dt))
        if i < 0:
            i = 0
        elif i >= len(self.positions):
            i = len(self.positions) - 1
        return (
            Vec2(self.positions[i, 0], self.positions[i, 1]),
            Vec2(self.velocities[i, 0], self.velocities[i, 1]),
        )

    def final_position(self) -> Vec2:
        return Vec2(self.positions[-1, 0], self.positions[-1, 1])

    def max_lateral_excursion(self, origin: Vec2, axis: Vec2) -> float:
        """Largest unsigned offset of the plan from the line origin + t*axis."""
        ax, ay = axis
        norm = math.hypot(ax, ay)
        nx, ny = -ay / norm, ax / norm
        off = (self.positions[:, 0] - origin.x) * nx + (self.positions[:, 1] - origin.y) * ny
        return float(np.max(np.abs(off)))

    def as_rows(self) -> np.ndarray:
        """(t, x, y, vx, vy) rows, the trajectory sidecar's column layout."""
        t = np.arange(len(self.positions)) * self.dt
        return np.column_stack([t, self.positions, self.velocities])

    def save_text(self, path: str) -> None:
        """Write the plan in the trial-log sidecar style: one-line header,
        whitespace-separated columns, lossless float text."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("t x y vx vy\n")
            for row in self.as_rows():
                fh.write(" ".join("%.17g" % v for v in row) + "\n")


def _step_matrices(k: float, d: float, tau: float, dt: float):
    """Exact one-step propagator of the linear attractor.

    Returns (E, M) with state' = E @ state + M @ [0, (K*g + phi)/tau] for the
    per-axis state [x, v]. Exact for the linear part, so plans inherit the
    continuous system's convergence and time-rescaling behaviour; phi is held
    constant over each step.
    """
    a = np.array([[0.0, 1.0 / tau], [-k / tau, -d / tau]])
    e = expm(a * dt)
    m = np.linalg.solve(a, e - np.eye(2))
    return e, m


def rollout_avoidance(
    start: Vec2,
    goal: Vec2,
    k: float,
    d: float,
    tau: float,
    n_steps: int,
    dt: float,
    obstacle: Optional[Obstacle],
    lam: float,
    beta: float,
    *,
    field_cutoff: float = DEFAULT_FIELD_CUTOFF,
    accel_cap: float = DEFAULT_ACCEL_CAP,
    detour_seed: float = DEFAULT_DETOUR_SEED,
    detour_side: float = DEFAULT_DETOUR_SIDE,
    check_collision: bool = False,
    velocities: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Integrate the coupled attractor from rest at ``start``.

    The shared core behind plan_trajectory and the identification
    objectives: one step is the exact propagator of the linear part with the
    field coupling held constant over the step. Returns the (n_steps+1, 2)
    position array; world velocities are filled into ``velocities`` when an
    array is supplied. With check_collision a swept pass through the obstacle
    raises PlanCollision.
    """
    e, m = _step_matrices(k, d, tau, dt)
    e11, e12 = e[0]
    e21, e22 = e[1]
    m12, m22 = m[0, 1], m[1, 1]
    gx, gy = goal

    positions = np.empty((n_steps + 1, 2))
    x, y = start
    vx = vy = 0.0  # internal attractor velocity (tau * world velocity)
    positions[0] = (x, y)
    if velocities is not None:
        velocities[0] = (0.0, 0.0)

    active_field = obstacle is not None and lam > 0.0
    seeded = not active_field
    inv_tau = 1.0 / tau
    if obstacle is not None:
        # Hoisted segment geometry for the per-step distance query.
        oax, oay = obstacle.endpoint_a
        obx, oby = obstacle.endpoint_b
        sdx, sdy = obx - oax, oby - oay
        seg_len_sq = sdx * sdx + sdy * sdy
    for i in range(1, n_steps + 1):
        if active_field:
            # Same operations as geometry.segment_distance, hoisted for speed.
            t_par = ((x - oax) * sdx + (y - oay) * sdy) / seg_len_sq
            if t_par < 0.0:
                t_par = 0.0
            elif t_par > 1.0:
                t_par = 1.0
            cx = oax + t_par * sdx
            cy = oay + t_par * sdy
            p = math.hypot(x - cx, y - cy)
            if p == 0.0:
                raise PlanCollision(f"plan touched the obstacle at step {i}")
            fx, fy = _field_accel_raw(
                x, y, vx, vy, p, cx, cy, lam, beta, field_cutoff, accel_cap
            )
            if not seeded and (fx != 0.0 or fy != 0.0):
                # First field activation: break the mirror symmetry of the
                # task geometry with a small lateral velocity.
                speed = math.hypot(vx, vy)
                vx, vy = (
                    vx + detour_seed * detour_side * (-vy / speed),
                    vy + detour_seed * detour_side * (vx / speed),
                )
                seeded = True
                fx, fy = _field_accel_raw(
                    x, y, vx, vy, p, cx, cy, lam, beta, field_cutoff, accel_cap
                )
        else:
            fx = fy = 0.0

        cx_ = (k * gx + fx) * inv_tau
        cy_ = (k * gy + fy) * inv_tau
        nx = e11 * x + e12 * vx + m12 * cx_
        nvx = e21 * x + e22 * vx + m22 * cx_
        ny = e11 * y + e12 * vy + m12 * cy_
        nvy = e21 * y + e22 * vy + m22 * cy_

        if check_collision and obstacle is not None and swept_collision(
            Vec2(x, y), Vec2(nx, ny), obstacle
        ):
            raise PlanCollision(f"plan swept through the obstacle at step {i}")

        x, y, vx, vy = nx, ny, nvx, nvy
        positions[i] = (x, y)
        if velocities is not None:
            velocities[i] = (vx * inv_tau, vy * inv_tau)

    return positions


def plan_trajectory(
    trial: "TrialSpec",
    gains: GainLawCoeffs,
    field_laws: Optional[FieldLawCoeffs],
    tau: float = 1.0,
    horizon: float = DEFAULT_PLAN_HORIZON,
    *,
    dt: float = 0.001,
    field_cutoff: float = DEFAULT_FIELD_CUTOFF,
    accel_cap: float = DEFAULT_ACCEL_CAP,
    detour_seed: float = DEFAULT_DETOUR_SEED,
    detour_side: float = DEFAULT_DETOUR_SIDE,
    check_collision: bool = True,
) -> PlannedTrajectory:
    """Generate the model's desired movement for one trial.

    Integrates the attractor with the field coupling from the trial start at
    rest; K/D follow the trial's ID, lambda/beta follow the obstacle's
    distance from the start. Without an obstacle (or with zero field
    strength) the coupling is identically zero and the plan is the pure
    attractor rollout, bit for bit.

    Raises PlanCollision if the planned path itself sweeps through the
    obstacle (reported, not silently accepted).
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    k = stiffness_from_id(trial.id_bits, gains)
    d = damping_from_id(trial.id_bits, gains)

    obstacle = trial.obstacle
    lam = beta = 0.0
    if obstacle is not None and field_laws is not None:
        o, _ = segment_distance(trial.start, obstacle)
        lam = lambda_from_obstacle(o, field_laws)
        beta = beta_from_obstacle(o, field_laws)

    n = int(round(horizon / dt))
    velocities = np.empty((n + 1, 2))
    positions = rollout_avoidance(
        trial.start,
        trial.target_center,
        k,
        d,
        tau,
        n,
        dt,
        obstacle,
        lam,
        beta,
        field_cutoff=field_cutoff,
        accel_cap=accel_cap,
        detour_seed=detour_seed,
        detour_side=detour_side,
        check_collision=check_collision,
        velocities=velocities,
    )
    return PlannedTrajectory(positions, velocities, dt, horizon)


def simulate_dmp_positions(
    start: Vec2, goal: Vec2, k: float, d: float, tau: float, times: np.ndarray
) -> np.ndarray:
    """Closed-form positions of the obstacle-free attractor started at rest.

    Exact solution of tau*v' = K(g-x) - Dv, tau*x' = v; used as the fast
    rollout inside the gain-identification objective.
    """
    times = np.asarray(times, dtype=float)
    disc = d * d - 4.0 * k
    if abs(disc) < 1e-9 * max(1.0, k):
        # Critically damped: x = g + (x0-g)(1 - s t) e^(s t), s = -sqrt(K)/tau
        s = -math.sqrt(k) / tau
        f = (1.0 - s * times) * np.exp(s * times)
    else:
        root = np.sqrt(complex(disc))
        s1 = (-d + root) / (2.0 * tau)
        s2 = (-d - root) / (2.0 * tau)
        f = ((s2 * np.exp(s1 * times) - s1 * np.exp(s2 * times)) / (s2 - s1)).real
    out = np.empty((len(times), 2))
    out[:, 0] = goal.x + (start.x - goal.x) * f
    out[:, 1] = goal.y + (start.y - goal.y) * f
    return out

"""Identification of a person's movement-model coefficients from recorded
trials.

Two-stage procedure mirroring the experimental sets: per-trial (K, D) fits on
obstacle-free recordings, regression of the gain laws over the index of
difficulty; then per-trial (lambda, beta) fits on successful obstacle
recordings with the gains frozen, and regression of the field laws over the
obstacle's distance from the start.

Per-trial fits minimize mean squared position error between the recorded
trajectory and the model rollout from the same start/goal, via Nelder-Mead
simplex search (the objective is a simulation rollout, non-smooth at the
field's activation boundaries). Position RMSE is the objective because
positions are the observable the model is meant to reproduce. Assumption,
per-trial-then-regress: each trial is fitted individually and the laws come
from regression over those fits, not from fits of per-condition averages.

On real (lagged, noisy) movement data the per-trial field fits scatter, and
the plainly regressed laws can leave the coefficients' validity region at
the edges of the task range; the pipeline then projects them to the nearest
valid laws (minimal intercept shift) and notes it in the diagnostics. Clean
model-generated data is never projected.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .avoidance import (
    DEFAULT_ID_RANGE,
    DEFAULT_O_RANGE,
    FieldLawCoeffs,
    GainLawCoeffs,
    PersonModel,
    damping_from_id,
    rollout_avoidance,
    simulate_dmp_positions,
    stiffness_from_id,
)
from .errors import (
    CollidedTrialRejected,
    FitDiverged,
    InsufficientConditions,
    TrajectoryTooShort,
)
from .geometry import Vec2, segment_distance, swept_collision
from .metrics import TrialRecord
from .trials import TrialOutcome, TrialSpec

MAX_EVALUATIONS = 2000
SPREAD_TOLERANCE = 1e-10   # divergence threshold on the final simplex spread
MIN_DURATION = 0.3         # s
BETA_SEARCH_MAX = 12.0     # field exponent search range (1, 12]
_PENALTY = 1e9


@dataclass
class RecordedTrial:
    """One trial's recorded movement: uniformly sampled states plus outcome."""

    trial: TrialSpec
    times: np.ndarray       # (n,) s
    positions: np.ndarray   # (n, 2) m
    velocities: np.ndarray  # (n, 2) m/s
    outcome: TrialOutcome

    def __post_init__(self):
        if len(self.times) == 0:
            raise ValueError("recorded trial has no states")
        if not (len(self.times) == len(self.positions) == len(self.velocities)):
            raise ValueError("state series lengths disagree")
        if len(self.times) > 1:
            steps = np.diff(self.times)
            if np.max(np.abs(steps - steps[0])) > 1e-9:
                raise ValueError("states must be uniformly sampled")

    @property
    def dt(self) -> float:
        if len(self.times) < 2:
            return 0.0
        return float(self.times[1] - self.times[0])

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    def collision_consistent(self) -> bool:
        """Whether the outcome's collision flag matches swept checks over the
        recorded path."""
        if self.trial.obstacle is None:
            return not self.outcome.collided
        hit = any(
            swept_collision(
                Vec2(*self.positions[i]), Vec2(*self.positions[i + 1]), self.trial.obstacle
            )
            for i in range(len(self.positions) - 1)
        )
        return hit == self.outcome.collided

    @classmethod
    def from_path_rows(cls, trial: TrialSpec, rows: np.ndarray, outcome: TrialOutcome):
        rows = np.asarray(rows, dtype=float)
        return cls(trial, rows[:, 0].copy(), rows[:, 1:3].copy(), rows[:, 3:5].copy(), outcome)


def trim_leading_rest(rec: RecordedTrial, speed_threshold: float = 1e-4) -> RecordedTrial:
    """Drop the stationary head of a recording (reaction delay), keeping the
    last at-rest sample so the fit still starts from rest."""
    speeds = np.hypot(rec.velocities[:, 0], rec.velocities[:, 1])
    moving = np.nonzero(speeds > speed_threshold)[0]
    if len(moving) == 0 or moving[0] <= 1:
        return rec
    i = moving[0] - 1
    return RecordedTrial(
        rec.trial, rec.times[i:], rec.positions[i:], rec.velocities[i:], rec.outcome
    )


def _simplex_result(res, what: str) -> np.ndarray:
    """Accept a simplex result, applying the spread-based divergence rule when
    the evaluation budget ran out."""
    if res.success:
        return res.x
    _, fsim = res.final_simplex
    spread = float(np.max(fsim) - np.min(fsim))
    if spread > SPREAD_TOLERANCE:
        raise FitDiverged(
            f"{what}: {res.nfev} evaluations without objective spread below "
            f"{SPREAD_TOLERANCE:g} (spread {spread:g})"
        )
    return res.x


def fit_dmp_trial(rec: RecordedTrial, tau: float = 1.0) -> tuple[float, float, float]:
    """Identify (K, D) from one obstacle-free recording.

    Starts the simplex from the critically damped guess K0 = 25/tau^2,
    D0 = 2*sqrt(K0). Returns (K, D, position RMSE in meters).
    """
    if rec.trial.obstacle is not None:
        raise ValueError("gain identification expects an obstacle-free recording")
    if rec.duration < MIN_DURATION:
        raise TrajectoryTooShort(f"duration {rec.duration:.3f} s < {MIN_DURATION} s")
    start = Vec2(*rec.positions[0])
    goal = rec.trial.target_center
    rel_times = rec.times - rec.times[0]
    displacement = np.max(np.hypot(*(rec.positions - rec.positions[0]).T))
    if displacement < 1e-6:
        raise FitDiverged("degenerate recording: the point never moved, gains unidentifiable")

    recorded = rec.positions

    def objective(params: np.ndarray) -> float:
        k, d = params
        if k <= 0 or d < 0:
            return _PENALTY
        sim = simulate_dmp_positions(start, goal, k, d, tau, rel_times)
        return float(np.mean(np.sum((sim - recorded) ** 2, axis=1)))

    k0 = 25.0 / (tau * tau)
    d0 = 2.0 * math.sqrt(k0)
    res = minimize(
        objective,
        np.array([k0, d0]),
        method="Nelder-Mead",
        options={"maxfev": MAX_EVALUATIONS, "fatol": 1e-14, "xatol": 1e-10},
    )
    k, d = _simplex_result(res, "gain fit")
    return float(k), float(d), math.sqrt(objective(np.array([k, d])))


def fit_field_trial(
    rec: RecordedTrial, gains: GainLawCoeffs, tau: float = 1.0
) -> tuple[float, float, float]:
    """Identify (lambda, beta) from one successful obstacle recording, with
    (K, D) frozen at the values the gain laws give for the trial's ID.

    Collided recordings are rejected: failed trials are excluded from
    identification. Returns (lambda, beta, position RMSE in meters).
    """
    if rec.trial.obstacle is None:
        raise ValueError("field identification expects a recording with an obstacle")
    if rec.outcome.collided:
        raise CollidedTrialRejected(f"trial {rec.trial.trial_id} hit the obstacle")
    if rec.duration < MIN_DURATION:
        raise TrajectoryTooShort(f"duration {rec.duration:.3f} s < {MIN_DURATION} s")

    k = stiffness_from_id(rec.trial.id_bits, gains)
    d = damping_from_id(rec.trial.id_bits, gains)
    start = Vec2(*rec.positions[0])
    goal = rec.trial.target_center
    obstacle = rec.trial.obstacle
    n_steps = len(rec.positions) - 1
    dt = rec.dt
    recorded = rec.positions

    def objective(params: np.ndarray) -> float:
        lam, beta = params
        if lam < 0 or not 1.0 < beta <= BETA_SEARCH_MAX:
            return _PENALTY
        sim = rollout_avoidance(
            start, goal, k, d, tau, n_steps, dt, obstacle, lam, beta, check_collision=False
        )
        return float(np.mean(np.sum((sim - recorded) ** 2, axis=1)))

    res = minimize(
        objective,
        np.array([0.01, 4.0]),
        method="Nelder-Mead",
        options={"maxfev": MAX_EVALUATIONS, "fatol": 1e-14, "xatol": 1e-10},
    )
    lam, beta = _simplex_result(res, "field fit")
    best = objective(np.array([lam, beta]))
    # Null-field check: recordings with no avoidance in them must identify as
    # lambda = 0, not as a flat high-beta valley where lambda is meaningless.
    null = objective(np.array([0.0, 4.0]))
    if null <= best:
        lam, beta, best = 0.0, 4.0, null
    return float(lam), float(beta), math.sqrt(best)


def _regress_gain_raw(points) -> tuple[float, float, float]:
    ids = np.array([p[0] for p in points])
    if len(np.unique(ids)) < 3:
        raise InsufficientConditions(
            f"gain-law regression needs >= 3 distinct ID values, got {len(np.unique(ids))}"
        )
    ks = np.array([p[1] for p in points])
    ds = np.array([p[2] for p in points])
    a = np.column_stack([ids, np.ones_like(ids)])
    (k1, k2), *_ = np.linalg.lstsq(a, ks, rcond=None)
    k3 = float(np.dot(ids, ds) / np.dot(ids, ids))
    return float(k1), float(k2), k3


def regress_gain_laws(points: Sequence[tuple[float, float, float]]) -> GainLawCoeffs:
    """Least squares of the gain laws over (ID, K, D) points: K affine in ID,
    D through the origin."""
    return GainLawCoeffs(*_regress_gain_raw(points))


def _regress_field_raw(points) -> tuple[float, float, float, float, float]:
    os_ = np.array([p[0] for p in points])
    if len(np.unique(os_)) < 3:
        raise InsufficientConditions(
            f"field-law regression needs >= 3 distinct obstacle distances, "
            f"got {len(np.unique(os_))}"
        )
    lams = np.array([p[1] for p in points])
    betas = np.array([p[2] for p in points])
    a_lam = np.column_stack([1.0 / os_, np.ones_like(os_)])
    (l1, l2), *_ = np.linalg.lstsq(a_lam, lams, rcond=None)
    a_beta = np.column_stack([os_ * os_, os_, np.ones_like(os_)])
    (b3, b4, b5), *_ = np.linalg.lstsq(a_beta, betas, rcond=None)
    return float(l1), float(l2), float(b3), float(b4), float(b5)


def regress_field_laws(points: Sequence[tuple[float, float, float]]) -> FieldLawCoeffs:
    """Least squares of the field laws over (o, lambda, beta) points:
    lambda against (1/o, 1), beta against (o^2, o, 1)."""
    return FieldLawCoeffs(*_regress_field_raw(points))


def _project_gain_laws(k1: float, k2: float, k3: float) -> tuple[tuple[float, float, float], bool]:
    """Smallest shift that makes the regressed gain laws valid over the task
    ID range (stiffness positive, damping non-negative)."""
    lo, hi = DEFAULT_ID_RANGE
    projected = False
    min_k = min(k1 * lo + k2, k1 * hi + k2)
    if min_k <= 0:
        k2 += 1e-6 - min_k
        projected = True
    if k3 < 0:
        k3 = 0.0
        projected = True
    return (k1, k2, k3), projected


def _project_field_laws(
    l1: float, l2: float, b3: float, b4: float, b5: float
) -> tuple[tuple[float, float, float, float, float], bool]:
    """Smallest shift that makes the regressed field laws valid over the task
    obstacle range (strength non-negative, exponent above 1)."""
    lo, hi = DEFAULT_O_RANGE
    projected = False
    min_lam = min(l1 / lo + l2, l1 / hi + l2)
    if min_lam < 0:
        l2 -= min_lam
        projected = True
    betas = [b3 * o * o + b4 * o + b5 for o in (lo, hi)]
    if b3 != 0:
        vertex = -b4 / (2 * b3)
        if lo < vertex < hi:
            betas.append(b3 * vertex * vertex + b4 * vertex + b5)
    min_beta = min(betas)
    if min_beta <= 1.0:
        b5 += 1.01 - min_beta
        projected = True
    return (l1, l2, b3, b4, b5), projected


@dataclass
class PerTrialFit:
    trial_id: int
    id_bits: float
    o: Optional[float]
    spring_k: Optional[float]
    damping_d: Optional[float]
    lam: Optional[float]
    beta: Optional[float]
    rmse: float


@dataclass
class FitReport:
    per_trial: list[PerTrialFit]
    gain_laws: Optional[GainLawCoeffs]
    field_laws: Optional[FieldLawCoeffs]
    tau: float
    diagnostics: dict = field(default_factory=dict)

    def person_model(self) -> PersonModel:
        if self.gain_laws is None:
            raise InsufficientConditions("no gain laws identified")
        return PersonModel(gain_laws=self.gain_laws, field_laws=self.field_laws, tau=self.tau)

    def to_dict(self) -> dict:
        return {
            "tau": self.tau,
            "gain_laws": (
                {"k1": self.gain_laws.k1, "k2": self.gain_laws.k2, "k3": self.gain_laws.k3}
                if self.gain_laws
                else None
            ),
            "field_laws": (
                {
                    "l1": self.field_laws.l1,
                    "l2": self.field_laws.l2,
                    "b3": self.field_laws.b3,
                    "b4": self.field_laws.b4,
                    "b5": self.field_laws.b5,
                }
                if self.field_laws
                else None
            ),
            "per_trial": [
                {
                    "trial_id": t.trial_id,
                    "id_bits": t.id_bits,
                    "o": t.o,
                    "K": t.spring_k,
                    "D": t.damping_d,
                    "lambda": t.lam,
                    "beta": t.beta,
                    "rmse": t.rmse,
                }
                for t in self.per_trial
            ],
            "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def identify_person_model(
    recorded: Sequence[RecordedTrial], tau: float = 1.0, trim_rest: bool = True
) -> FitReport:
    """Run the full two-stage identification over a session's recordings.

    Identical recordings (repeated conditions from a deterministic source)
    share one fit via memoization; the result is the same as fitting each
    repeat separately.
    """
    free = [r for r in recorded if r.trial.obstacle is None]
    obstructed = [r for r in recorded if r.trial.obstacle is not None]
    diagnostics: dict = {
        "n_trials": len(recorded),
        "n_gain_trials": len(free),
        "n_field_trials": len(obstructed),
        "rejected_collisions": 0,
        "diverged_fits": 0,
        "mean_gain_rmse": None,
        "mean_field_rmse": None,
    }

    per_trial: list[PerTrialFit] = []
    gain_points: list[tuple[float, float, float]] = []
    memo: dict[bytes, tuple] = {}

    def fit_key(rec: RecordedTrial, stage: str) -> bytes:
        return (
            stage.encode()
            + repr(
                (rec.trial.start, rec.trial.target_center, rec.trial.target_width, rec.trial.obstacle)
            ).encode()
            + rec.positions.tobytes()
        )

    for rec in free:
        r = trim_leading_rest(rec) if trim_rest else rec
        key = fit_key(r, "gain")
        try:
            if key in memo:
                k, d, rmse = memo[key]
            else:
                k, d, rmse = fit_dmp_trial(r, tau)
                memo[key] = (k, d, rmse)
        except (FitDiverged, TrajectoryTooShort):
            diagnostics["diverged_fits"] += 1
            continue
        gain_points.append((rec.trial.id_bits, k, d))
        per_trial.append(
            PerTrialFit(rec.trial.trial_id, rec.trial.id_bits, None, k, d, None, None, rmse)
        )

    gain_laws = None
    try:
        raw, projected = _project_gain_laws(*_regress_gain_raw(gain_points))
        gain_laws = GainLawCoeffs(*raw)
        if projected:
            diagnostics.setdefault("projected_laws", []).append("gain")
    except InsufficientConditions:
        pass

    field_points: list[tuple[float, float, float]] = []
    if gain_laws is not None:
        for rec in obstructed:
            if rec.outcome.collided:
                diagnostics["rejected_collisions"] += 1
                continue
            r = trim_leading_rest(rec) if trim_rest else rec
            o, _ = segment_distance(rec.trial.start, rec.trial.obstacle)
            key = fit_key(r, "field")
            try:
                if key in memo:
                    lam, beta, rmse = memo[key]
                else:
                    lam, beta, rmse = fit_field_trial(r, gain_laws, tau)
                    memo[key] = (lam, beta, rmse)
            except (FitDiverged, TrajectoryTooShort):
                diagnostics["diverged_fits"] += 1
                continue
            field_points.append((o, lam, beta))
            per_trial.append(
                PerTrialFit(rec.trial.trial_id, rec.trial.id_bits, o, None, None, lam, beta, rmse)
            )

    field_laws = None
    try:
        raw, projected = _project_field_laws(*_regress_field_raw(field_points))
        field_laws = FieldLawCoeffs(*raw)
        if projected:
            diagnostics.setdefault("projected_laws", []).append("field")
    except InsufficientConditions:
        pass

    gain_rmses = [t.rmse for t in per_trial if t.spring_k is not None]
    field_rmses = [t.rmse for t in per_trial if t.lam is not None]
    if gain_rmses:
        diagnostics["mean_gain_rmse"] = sum(gain_rmses) / len(gain_rmses)
    if field_rmses:
        diagnostics["mean_field_rmse"] = sum(field_rmses) / len(field_rmses)

    return FitReport(
        per_trial=per_trial,
        gain_laws=gain_laws,
        field_laws=field_laws,
        tau=tau,
        diagnostics=diagnostics,
    )


def recorded_trials_from_log(
    records: Sequence[TrialRecord], trajectories: dict[int, np.ndarray]
) -> list[RecordedTrial]:
    """Rebuild RecordedTrials from a persisted session log."""
    from .geometry import Obstacle  # local import to keep module deps flat

    out = []
    for r in records:
        rows = trajectories.get(r.trial_id)
        if rows is None or len(rows) == 0:
            continue
        obstacle = None
        if r.obstacle is not None:
            ax, ay, bx, by = r.obstacle
            obstacle = Obstacle(Vec2(ax, ay), Vec2(bx, by))
        spec = TrialSpec(
            trial_id=r.trial_id,
            start=Vec2(*r.start),
            target_center=Vec2(*r.target_center),
            target_distance=r.target_distance,
            target_width=r.target_width,
            size_class=r.size_class,
            obstacle=obstacle,
            id_bits=r.id_bits,
        )
        outcome = TrialOutcome(
            success=r.success, collided=r.collided, movement_time=r.movement_time
        )
        out.append(RecordedTrial.from_path_rows(spec, rows, outcome))
    return out

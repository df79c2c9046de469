"""Executable trial protocol: the session state machine and the simulated
human partner for headless runs.

One logical owner mutates a Session through tick(); human force arrives as an
argument, the robot partner (when configured) is consulted inside the tick,
and the summed force drives the plant. Phase transitions follow

    at_start -> target_shown -> moving -> (dwelling -> success |
    failed_collision) -> returning -> at_start

with dwelling allowed to revert to moving when the point exits the target
before the dwell completes. A swept check against the live obstacle decides
failures; on failure the target disappears and the trial is returned without
being reached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .avoidance import (
    DEFAULT_FIELD_LAWS,
    DEFAULT_GAIN_LAWS,
    DEFAULT_PLAN_HORIZON,
    FieldLawCoeffs,
    GainLawCoeffs,
    PlannedTrajectory,
    plan_trajectory,
)
from .errors import PlanCollision, SessionComplete
from .geometry import Vec2, clamp_magnitude, require_finite, swept_collision
from .partner import RobotPartner
from .plant import BodyState, PlantParams, step_plant
from .trials import (
    LEGAL_TRANSITIONS,
    SessionConfig,
    TrialOutcome,
    TrialPhase,
    TrialSpec,
    generate_session,
)

# Speed above which the point counts as moving; movement time runs from the
# first tick past this threshold to the target entry that begins the
# successful dwell.
MOVEMENT_SPEED_THRESHOLD = 0.02  # m/s


@dataclass(frozen=True)
class SimHumanParams:
    """Stand-in for a live human in headless runs: tracks its own planned
    movement with a spring after a reaction delay, plus seeded force noise."""

    gain_laws: GainLawCoeffs = DEFAULT_GAIN_LAWS
    field_laws: Optional[FieldLawCoeffs] = DEFAULT_FIELD_LAWS
    reaction_delay: float = 0.15   # s
    force_gain: float = 100.0      # N per m of tracking error
    noise_sigma: float = 0.3       # N per axis
    seed: int = 0

    def __post_init__(self):
        if self.reaction_delay < 0 or self.noise_sigma < 0:
            raise ValueError("reaction_delay and noise_sigma must be non-negative")
        if self.force_gain < 0:
            raise ValueError("force_gain must be non-negative")


class SimHuman:
    """Deterministic simulated human: plans like the avoidance model and
    servos toward that plan; one RNG stream per instance."""

    def __init__(self, params: SimHumanParams, plan_horizon: float = DEFAULT_PLAN_HORIZON):
        self.params = params
        self.plan_horizon = plan_horizon
        self._rng = np.random.Generator(np.random.PCG64(params.seed))
        self._plan: Optional[PlannedTrajectory] = None
        self._onset: float = 0.0
        self._plan_cache: dict[tuple, Optional[PlannedTrajectory]] = {}

    def on_target(self, trial: TrialSpec, onset_time: float) -> None:
        key = (trial.start, trial.target_center, trial.target_width, trial.obstacle)
        if key not in self._plan_cache:
            try:
                self._plan_cache[key] = plan_trajectory(
                    trial,
                    self.params.gain_laws,
                    self.params.field_laws,
                    horizon=self.plan_horizon,
                )
            except PlanCollision:
                self._plan_cache[key] = None
        self._plan = self._plan_cache[key]
        self._onset = onset_time

    def on_trial_end(self) -> None:
        self._plan = None

    def reach_force(self, state: BodyState, trial: TrialSpec, now: float) -> Vec2:
        return sim_human_force(self, state, trial, now)

    def return_force(self, state: BodyState, start: Vec2) -> Vec2:
        """Spring back to the start between trials (no noise: the return leg
        is protocol plumbing, not part of the recorded reach)."""
        g = self.params.force_gain
        return Vec2(g * (start.x - state.position.x), g * (start.y - state.position.y))


def sim_human_force(sim: SimHuman, state: BodyState, trial: TrialSpec, now: float) -> Vec2:
    """Simulated human force during the reach.

    Zero until reaction_delay after target onset; afterwards a spring toward
    the simulated person's own planned movement plus seeded Gaussian noise
    per axis. Deterministic for a fixed seed.
    """
    del trial  # the plan was built at target onset
    t_rel = now - sim._onset - sim.params.reaction_delay
    if t_rel < 0 or sim._plan is None:
        return Vec2(0.0, 0.0)
    ref_p, _ = sim._plan.sample_at(t_rel)
    g = sim.params.force_gain
    fx = g * (ref_p.x - state.position.x)
    fy = g * (ref_p.y - state.position.y)
    if sim.params.noise_sigma > 0.0:
        fx += sim.params.noise_sigma * sim._rng.standard_normal()
        fy += sim.params.noise_sigma * sim._rng.standard_normal()
    return Vec2(fx, fy)


@dataclass
class TrialEvent:
    kind: str
    trial_id: int
    time: float
    payload: dict = field(default_factory=dict)


class Session:
    """Single-owner session state machine; call tick() with the human force
    for this step."""

    def __init__(
        self,
        cfg: SessionConfig,
        plant: PlantParams = PlantParams(),
        partner: Optional[RobotPartner] = None,
        sim_human: Optional[SimHuman] = None,
    ):
        self.cfg = cfg
        self.plant = plant
        self.partner = partner
        self.sim_human = sim_human
        self.trials: list[TrialSpec] = generate_session(cfg)
        self.state = BodyState(cfg.start, Vec2(0.0, 0.0), 0.0)
        self.phase = TrialPhase.AT_START
        self.trial_index = 0
        self.completed: list[tuple[TrialSpec, TrialOutcome]] = []
        self.done = False
        self.last_robot_force = Vec2(0.0, 0.0)

        self._onset_time: Optional[float] = None
        self._movement_onset: Optional[float] = None
        self._dwell_entry: Optional[float] = None
        self._last_entry: Optional[float] = None
        self._path: list[tuple] = []

    @property
    def current_trial(self) -> Optional[TrialSpec]:
        if self.done:
            return None
        return self.trials[self.trial_index]

    def target_visible(self) -> bool:
        return self.phase in (TrialPhase.TARGET_SHOWN, TrialPhase.MOVING, TrialPhase.DWELLING)

    def _set_phase(self, phase: TrialPhase, events: list[TrialEvent], time: float, **payload):
        if phase not in LEGAL_TRANSITIONS[self.phase]:
            raise RuntimeError(f"illegal phase transition {self.phase} -> {phase}")
        self.phase = phase
        trial = self.trials[self.trial_index]
        events.append(TrialEvent(phase.value, trial.trial_id, time, dict(payload)))

    def tick(self, human_force: Vec2, dt: Optional[float] = None) -> list[TrialEvent]:
        """Advance the session by one plant step under the given human force."""
        if self.done:
            raise SessionComplete("session has no trials left")
        if dt is not None and dt != self.plant.dt:
            raise ValueError("tick dt must match the plant's fixed step")
        require_finite(human_force, "human force")

        events: list[TrialEvent] = []
        trial = self.trials[self.trial_index]
        now = self.state.time

        # Show the next target once the point sits at the start.
        if self.phase == TrialPhase.AT_START:
            if (self.state.position - self.cfg.start).norm() <= self.cfg.start_radius:
                self._set_phase(TrialPhase.TARGET_SHOWN, events, now)
                self._onset_time = now
                self._movement_onset = None
                self._dwell_entry = None
                self._last_entry = None
                self._path = [
                    (now, *self.state.position, *self.state.velocity, 0.0, 0.0, 0.0, 0.0)
                ]
                if self.partner is not None:
                    self.partner.on_target(trial, now)
                if self.sim_human is not None:
                    self.sim_human.on_target(trial, now)

        # Forces for this step.
        fr = Vec2(0.0, 0.0)
        if self.partner is not None and self.target_visible():
            fr = self.partner.force(self.state)
            self.partner.advance(self.plant.dt)
        self.last_robot_force = fr
        fx, fy = clamp_magnitude(human_force.x + fr.x, human_force.y + fr.y, self.plant.force_cap)

        prev_pos = self.state.position
        prev_phase = self.phase
        self.state = step_plant(self.state, Vec2(fx, fy), self.plant)
        now = self.state.time

        if prev_phase in (TrialPhase.TARGET_SHOWN, TrialPhase.MOVING, TrialPhase.DWELLING):
            self._path.append(
                (
                    now,
                    *self.state.position,
                    *self.state.velocity,
                    human_force.x,
                    human_force.y,
                    fr.x,
                    fr.y,
                )
            )

        # Collision first: failure preempts any other transition this tick.
        collided = (
            prev_phase in (TrialPhase.MOVING, TrialPhase.DWELLING)
            and trial.obstacle is not None
            and swept_collision(prev_pos, self.state.position, trial.obstacle)
        )
        if collided:
            if prev_phase == TrialPhase.DWELLING:
                self._set_phase(TrialPhase.MOVING, events, now)
            self._set_phase(TrialPhase.FAILED_COLLISION, events, now)
            self._finish_trial(success=False, collided=True, events=events, time=now)
            return events

        if self.phase == TrialPhase.TARGET_SHOWN:
            speed = self.state.velocity.norm()
            if speed > MOVEMENT_SPEED_THRESHOLD or trial.inside_target(self.state.position):
                self._set_phase(TrialPhase.MOVING, events, now)
                self._movement_onset = now

        if self.phase == TrialPhase.MOVING:
            if trial.inside_target(self.state.position):
                self._set_phase(TrialPhase.DWELLING, events, now)
                self._dwell_entry = now
                self._last_entry = now
        elif self.phase == TrialPhase.DWELLING:
            if not trial.inside_target(self.state.position):
                self._set_phase(TrialPhase.MOVING, events, now)
                self._dwell_entry = None
            elif now - self._dwell_entry >= self.cfg.dwell_time:
                self._set_phase(TrialPhase.SUCCESS, events, now)
                mt = self._last_entry - (
                    self._movement_onset if self._movement_onset is not None else self._onset_time
                )
                self._finish_trial(
                    success=True, collided=False, events=events, time=now, movement_time=mt
                )
        elif self.phase == TrialPhase.RETURNING:
            if (self.state.position - self.cfg.start).norm() <= self.cfg.start_radius:
                self._set_phase(TrialPhase.AT_START, events, now)
                self.trial_index += 1
                if self.trial_index >= len(self.trials):
                    self.done = True
                    events.append(TrialEvent("session_complete", trial.trial_id, now))

        return events

    def _finish_trial(
        self,
        success: bool,
        collided: bool,
        events: list[TrialEvent],
        time: float,
        movement_time: Optional[float] = None,
    ) -> None:
        trial = self.trials[self.trial_index]
        outcome = TrialOutcome(
            success=success, collided=collided, movement_time=movement_time, path=self._path
        )
        self.completed.append((trial, outcome))
        self._path = []
        if self.partner is not None:
            self.partner.on_trial_end()
        if self.sim_human is not None:
            self.sim_human.on_trial_end()
        if success:
            events.append(
                TrialEvent("trial_complete", trial.trial_id, time, {"movement_time": movement_time})
            )
        else:
            events.append(TrialEvent("trial_complete", trial.trial_id, time, {"collided": True}))
        self._set_phase(TrialPhase.RETURNING, events, time)

    def human_force_for_tick(self) -> Vec2:
        """Simulated-human force for the current tick (headless sessions)."""
        if self.sim_human is None:
            return Vec2(0.0, 0.0)
        if self.done:
            return Vec2(0.0, 0.0)
        if self.target_visible():
            return self.sim_human.reach_force(self.state, self.trials[self.trial_index], self.state.time)
        if self.phase == TrialPhase.RETURNING:
            return self.sim_human.return_force(self.state, self.cfg.start)
        return Vec2(0.0, 0.0)


def run_headless_session(session: Session, max_ticks: int = 20_000_000) -> list[TrialEvent]:
    """Drive a session with its simulated human until completion."""
    all_events: list[TrialEvent] = []
    ticks = 0
    while not session.done:
        all_events.extend(session.tick(session.human_force_for_tick()))
        ticks += 1
        if ticks > max_ticks:
            raise RuntimeError("session did not complete within the tick budget")
    return all_events

import math
from collections import Counter

import numpy as np
import pytest

from reachbench.engine import (
    MOVEMENT_SPEED_THRESHOLD,
    Session,
    SimHuman,
    SimHumanParams,
    run_headless_session,
    sim_human_force,
)
from reachbench.errors import SessionComplete, UnbalancedConfig
from reachbench.geometry import Vec2
from reachbench.partner import RobotPartner, RobotPartnerConfig, Role
from reachbench.plant import BodyState
from reachbench.trials import (
    SIZE_CLASSES,
    TARGET_DISTANCES,
    SessionConfig,
    TrialOutcome,
    TrialPhase,
    evaluation_set_order,
    generate_session,
)


class TestGenerateSession:
    def test_45_trials_balance(self):
        trials = generate_session(SessionConfig(trials_per_session=45, seed=0))
        counts = Counter((t.target_distance, t.size_class) for t in trials)
        assert len(counts) == 9
        assert all(c == 5 for c in counts.values())

    def test_90_trials_balance(self):
        trials = generate_session(SessionConfig(trials_per_session=90, seed=0))
        counts = Counter((t.target_distance, t.size_class) for t in trials)
        assert all(c == 10 for c in counts.values())

    def test_same_seed_same_order(self):
        a = generate_session(SessionConfig(seed=42))
        b = generate_session(SessionConfig(seed=42))
        assert [(t.target_distance, t.size_class) for t in a] == [
            (t.target_distance, t.size_class) for t in b
        ]

    def test_different_seeds_differ(self):
        a = generate_session(SessionConfig(seed=1))
        b = generate_session(SessionConfig(seed=2))
        assert [(t.target_distance, t.size_class) for t in a] != [
            (t.target_distance, t.size_class) for t in b
        ]

    def test_unbalanced_config_rejected(self):
        with pytest.raises(UnbalancedConfig):
            SessionConfig(trials_per_session=44)

    def test_obstacle_midway(self):
        for t in generate_session(SessionConfig(seed=3, obstacle_enabled=True)):
            mid = t.obstacle.midpoint()
            along = math.hypot(mid.x - t.start.x, mid.y - t.start.y)
            assert along == pytest.approx(t.target_distance / 2.0, abs=1e-12)

    def test_id_bits_consistent(self):
        for t in generate_session(SessionConfig(seed=3)):
            assert t.id_bits == pytest.approx(
                math.log2(t.target_distance / t.target_width + 1.0), abs=1e-12
            )

    def test_evaluation_set_order(self):
        order = evaluation_set_order(7)
        assert order[0] == "individual"
        assert sorted(order[1:]) == ["robot_equal", "robot_follower", "robot_leader"]
        assert evaluation_set_order(7) == order  # seeded


def drive(session, force_fn, max_ticks=400_000):
    events = []
    for _ in range(max_ticks):
        if session.done:
            break
        events.extend(session.tick(force_fn(session)))
    return events


def spring_to(target, gain=150.0):
    def fn(session):
        p = session.state.position
        if session.target_visible():
            g = session.current_trial.target_center if target == "target" else target
        else:
            g = session.cfg.start
        return Vec2(gain * (g.x - p.x), gain * (g.y - p.y))

    return fn


class TestPhaseMachine:
    def test_success_path(self):
        cfg = SessionConfig(trials_per_session=9, seed=1, obstacle_enabled=False)
        session = Session(cfg)
        events = drive(session, spring_to("target"))
        kinds = [e.kind for e in events]
        assert session.done
        assert kinds.count("success") == 9
        assert kinds.count("failed_collision") == 0
        assert "session_complete" in kinds
        for _, outcome in session.completed:
            assert outcome.success and not outcome.collided
            assert outcome.movement_time is not None and outcome.movement_time > 0

    def test_collision_path(self):
        # A straight pull through the midway obstacle must fail every trial.
        cfg = SessionConfig(trials_per_session=9, seed=1, obstacle_enabled=True)
        session = Session(cfg)
        events = drive(session, spring_to("target"))
        kinds = [e.kind for e in events]
        assert kinds.count("failed_collision") == 9
        assert kinds.count("success") == 0
        for _, outcome in session.completed:
            assert outcome.collided and not outcome.success
            assert outcome.movement_time is None

    def test_collision_removes_target_and_returns(self):
        cfg = SessionConfig(trials_per_session=9, seed=1, obstacle_enabled=True)
        session = Session(cfg)
        while not session.completed:
            session.tick(spring_to("target")(session))
        assert session.phase == TrialPhase.RETURNING
        assert not session.target_visible()

    def test_zero_force_stalls_before_dwelling(self):
        cfg = SessionConfig(trials_per_session=9, seed=1)
        session = Session(cfg)
        for _ in range(5000):
            session.tick(Vec2(0.0, 0.0))
        assert session.phase in (TrialPhase.TARGET_SHOWN, TrialPhase.MOVING)
        assert not session.completed

    def test_dwell_abort_and_reentry(self):
        cfg = SessionConfig(trials_per_session=9, seed=1, obstacle_enabled=False, dwell_time=0.4)
        session = Session(cfg)
        bump = {"state": "approach", "until": None}

        def controller(s):
            p = s.state.position
            if not s.target_visible():
                g = s.cfg.start
                return Vec2(150.0 * (g.x - p.x), 150.0 * (g.y - p.y))
            trial = s.current_trial
            if bump["state"] == "approach" and s.phase == TrialPhase.DWELLING:
                if s.state.time - s._dwell_entry > 0.1:
                    bump["state"] = "bump"
                    bump["until"] = s.state.time + 0.15
            if bump["state"] == "bump":
                if s.state.time >= bump["until"]:
                    bump["state"] = "done"
                else:
                    return Vec2(0.0, 60.0)  # shove it out of the target
            g = trial.target_center
            return Vec2(150.0 * (g.x - p.x), 150.0 * (g.y - p.y))

        events = []
        while not session.completed and not session.done:
            events.extend(session.tick(controller(session)))
        kinds = [e.kind for e in events]
        first_dwell = kinds.index("dwelling")
        assert "moving" in kinds[first_dwell:]          # dwell aborted
        assert kinds.index("success") > first_dwell     # later re-entry succeeded
        spec, outcome = session.completed[0]
        assert outcome.success

    def test_movement_time_runs_from_onset_to_final_entry(self):
        cfg = SessionConfig(trials_per_session=9, seed=1, obstacle_enabled=False)
        session = Session(cfg)
        onset_time = None
        entry_times = []
        while not session.completed:
            events = session.tick(spring_to("target")(session))
            for e in events:
                if e.kind == "moving" and onset_time is None:
                    onset_time = e.time
                    speed = session.state.velocity.norm()
                    assert speed > MOVEMENT_SPEED_THRESHOLD
                if e.kind == "dwelling":
                    entry_times.append(e.time)
        _, outcome = session.completed[0]
        # MT spans from motion onset to the entry that began the winning dwell.
        assert outcome.movement_time == pytest.approx(entry_times[-1] - onset_time, abs=1e-12)

    def test_path_starts_at_start(self):
        cfg = SessionConfig(trials_per_session=18, seed=4, obstacle_enabled=True)
        sim = SimHuman(SimHumanParams(seed=9))
        session = Session(cfg, sim_human=sim)
        run_headless_session(session)
        for spec, outcome in session.completed:
            x0, y0 = outcome.path[0][1], outcome.path[0][2]
            assert math.hypot(x0 - spec.start.x, y0 - spec.start.y) <= cfg.start_radius

    def test_success_and_collision_exclusive(self):
        with pytest.raises(ValueError):
            TrialOutcome(success=True, collided=True, movement_time=1.0)
        with pytest.raises(ValueError):
            TrialOutcome(success=True, collided=False, movement_time=None)

    def test_session_complete_raises_after_done(self):
        cfg = SessionConfig(trials_per_session=9, seed=1, obstacle_enabled=False)
        session = Session(cfg)
        drive(session, spring_to("target"))
        with pytest.raises(SessionComplete):
            session.tick(Vec2(0.0, 0.0))


class TestSimHuman:
    def test_zero_before_reaction_delay(self):
        params = SimHumanParams(reaction_delay=0.2, noise_sigma=0.0, seed=0)
        sim = SimHuman(params)
        cfg = SessionConfig(obstacle_enabled=False)
        trial = generate_session(cfg)[0]
        sim.on_target(trial, onset_time=1.0)
        state = BodyState(trial.start, Vec2(0.0, 0.0), 1.1)
        assert sim_human_force(sim, state, trial, 1.1) == Vec2(0.0, 0.0)

    def test_zero_on_reference_without_noise(self):
        params = SimHumanParams(reaction_delay=0.0, noise_sigma=0.0, seed=0)
        sim = SimHuman(params)
        cfg = SessionConfig(obstacle_enabled=False)
        trial = generate_session(cfg)[0]
        sim.on_target(trial, onset_time=0.0)
        ref_p, _ = sim._plan.sample_at(0.5)
        state = BodyState(ref_p, Vec2(0.0, 0.0), 0.5)
        assert sim_human_force(sim, state, trial, 0.5) == Vec2(0.0, 0.0)

    def test_default_success_rate_at_least_95_percent(self):
        cfg = SessionConfig(mode="individual", trials_per_session=45, seed=1, obstacle_enabled=True)
        session = Session(cfg, sim_human=SimHuman(SimHumanParams(seed=11)))
        run_headless_session(session)
        successes = sum(1 for _, o in session.completed if o.success)
        assert successes >= math.ceil(0.95 * 45)


class TestDeterminism:
    def _run(self, seed=7):
        cfg = SessionConfig(
            mode="robot_equal", trials_per_session=9, seed=seed, obstacle_enabled=True
        )
        partner = RobotPartner(RobotPartnerConfig(role=Role.EQUAL), __import__("reachbench").PersonModel())
        session = Session(cfg, partner=partner, sim_human=SimHuman(SimHumanParams(seed=seed + 1)))
        run_headless_session(session)
        return session

    def test_bit_identical_outcomes(self):
        a = self._run()
        b = self._run()
        assert len(a.completed) == len(b.completed)
        for (sa, oa), (sb, ob) in zip(a.completed, b.completed):
            assert sa == sb
            assert oa.success == ob.success
            assert oa.movement_time == ob.movement_time
            assert np.array_equal(np.array(oa.path), np.array(ob.path))

import math

import numpy as np
import pytest

from reachbench.avoidance import DEFAULT_GAIN_LAWS, PersonModel, PlannedTrajectory
from reachbench.geometry import Vec2, clamp_magnitude
from reachbench.partner import (
    PartnerState,
    RobotPartner,
    RobotPartnerConfig,
    Role,
    retarget,
    robot_force,
    role_coefficient,
)
from reachbench.plant import BodyState, PlantParams, body_at, step_plant
from reachbench.trials import SessionConfig, make_trial


def static_plan(px, py):
    return PlannedTrajectory(
        positions=np.array([[px, py]]),
        velocities=np.array([[0.0, 0.0]]),
        dt=0.001,
        horizon=0.0,
    )


class TestRoleCoefficient:
    def test_follower(self):
        assert role_coefficient(Role.FOLLOWER) == 0.75

    def test_equal(self):
        assert role_coefficient(Role.EQUAL) == 1.0

    def test_leader(self):
        assert role_coefficient(Role.LEADER) == 1.25


class TestRobotForce:
    def test_zero_on_reference(self):
        partner = PartnerState(plan=static_plan(0.1, 0.05))
        point = body_at(0.1, 0.05)
        assert robot_force(partner, point, RobotPartnerConfig()) == Vec2(0.0, 0.0)

    def test_zero_without_plan(self):
        assert robot_force(PartnerState(), body_at(0.3, 0.3), RobotPartnerConfig()) == Vec2(0.0, 0.0)

    def test_spring_arithmetic(self):
        cfg = RobotPartnerConfig(kp=100.0, kd=0.0, role=Role.EQUAL)
        partner = PartnerState(plan=static_plan(0.01, 0.0))
        assert robot_force(partner, body_at(0.0, 0.0), cfg) == Vec2(1.0, 0.0)

    def test_leader_follower_ratio(self):
        partner = PartnerState(plan=static_plan(0.02, -0.01))
        point = body_at(0.0, 0.0, 0.05, -0.02)
        f_f = robot_force(partner, point, RobotPartnerConfig(role=Role.FOLLOWER))
        f_l = robot_force(partner, point, RobotPartnerConfig(role=Role.LEADER))
        assert f_l.x == pytest.approx((5.0 / 3.0) * f_f.x, rel=1e-14)
        assert f_l.y == pytest.approx((5.0 / 3.0) * f_f.y, rel=1e-14)

    def test_linear_in_role_coefficient_below_cap(self):
        partner = PartnerState(plan=static_plan(0.03, 0.01))
        point = body_at(0.0, 0.0, -0.1, 0.2)
        forces = {
            role: robot_force(partner, point, RobotPartnerConfig(role=role))
            for role in Role
        }
        base = forces[Role.EQUAL]
        for role, scale in ((Role.FOLLOWER, 0.75), (Role.LEADER, 1.25)):
            assert forces[role].x == pytest.approx(scale * base.x, rel=1e-14)
            assert forces[role].y == pytest.approx(scale * base.y, rel=1e-14)

    def test_force_cap(self):
        cfg = RobotPartnerConfig(kp=1000.0, kd=0.0, force_cap=10.0)
        partner = PartnerState(plan=static_plan(1.0, 0.0))
        f = robot_force(partner, body_at(0.0, 0.0), cfg)
        assert f.norm() == pytest.approx(10.0)

    def test_plan_clock_holds_last_sample(self):
        plan = PlannedTrajectory(
            positions=np.array([[0.0, 0.0], [0.1, 0.0]]),
            velocities=np.array([[0.0, 0.0], [0.0, 0.0]]),
            dt=0.001,
            horizon=0.001,
        )
        partner = PartnerState(plan=plan, plan_clock=99.0)
        f = robot_force(partner, body_at(0.1, 0.0), RobotPartnerConfig())
        assert f == Vec2(0.0, 0.0)  # servo collapsed onto the held goal sample


class TestRetarget:
    def test_same_trial_gives_identical_plans(self):
        cfg = SessionConfig(obstacle_enabled=True)
        trial = make_trial(0, cfg, 0.25, "medium")
        model = PersonModel()
        a = retarget(PartnerState(), trial, model, now=0.0)
        b = retarget(PartnerState(), trial, model, now=5.0)
        assert np.array_equal(a.plan.positions, b.plan.positions)
        assert a.plan_clock == 0.0

    def test_quarter_meter_trial_detours(self):
        cfg = SessionConfig(obstacle_enabled=True)
        trial = make_trial(0, cfg, 0.25, "medium")
        state = retarget(PartnerState(), trial, PersonModel(), now=0.0)
        excursion = state.plan.max_lateral_excursion(trial.start, Vec2(1.0, 0.0))
        assert excursion > 0.02  # beyond the obstacle half-length

    def test_plan_collision_falls_back_to_no_plan(self):
        cfg = SessionConfig(obstacle_enabled=True)
        trial = make_trial(0, cfg, 0.15, "medium")
        model = PersonModel(field_laws=None)  # no field: the plan must collide
        state = retarget(PartnerState(), trial, model, now=0.0)
        assert state.plan is None
        assert robot_force(state, body_at(0.0, 0.0), RobotPartnerConfig()) == Vec2(0.0, 0.0)

    def test_force_engages_within_a_tick_of_planning(self):
        cfg = SessionConfig(obstacle_enabled=True)
        trial = make_trial(0, cfg, 0.15, "medium")
        partner = RobotPartner(RobotPartnerConfig(), PersonModel())
        point = body_at(*trial.start)
        assert partner.force(point) == Vec2(0.0, 0.0)
        partner.on_target(trial, 0.0)
        partner.advance(0.001)
        assert partner.force(point).norm() > 0.0


class TestClosedLoop:
    def test_static_reference_converges(self):
        # With a static plan point and no human force the plant must settle
        # on the reference with < 1e-4 m steady-state error.
        plant = PlantParams()
        cfg = RobotPartnerConfig()
        partner = PartnerState(plan=static_plan(0.1, -0.05))
        state = body_at(0.0, 0.0)
        for _ in range(4000):
            f = robot_force(partner, state, cfg)
            fx, fy = clamp_magnitude(f.x, f.y, plant.force_cap)
            state = step_plant(state, Vec2(fx, fy), plant)
        assert math.hypot(state.position.x - 0.1, state.position.y + 0.05) < 1e-4

    def test_robot_alone_completes_all_conditions(self, fitted_model):
        # Headless closed loop, human force identically zero, laws from the
        # synthetic-oracle identification: every task condition is reached
        # without touching the obstacle.
        from reachbench.geometry import swept_collision
        from reachbench.trials import SIZE_CLASSES, TARGET_DISTANCES

        plant = PlantParams()
        session_cfg = SessionConfig(obstacle_enabled=True)
        for dist in TARGET_DISTANCES:
            for size in SIZE_CLASSES:
                trial = make_trial(0, session_cfg, dist, size)
                partner = RobotPartner(RobotPartnerConfig(role=Role.EQUAL), fitted_model)
                partner.on_target(trial, 0.0)
                state = body_at(*trial.start)
                entered = False
                for _ in range(6000):
                    f = partner.force(state)
                    partner.advance(plant.dt)
                    fx, fy = clamp_magnitude(f.x, f.y, plant.force_cap)
                    nxt = step_plant(state, Vec2(fx, fy), plant)
                    assert not swept_collision(
                        state.position, nxt.position, trial.obstacle
                    ), (dist, size)
                    state = nxt
                    if trial.inside_target(state.position):
                        entered = True
                assert entered, (dist, size)
                err = math.hypot(
                    state.position.x - trial.target_center.x,
                    state.position.y - trial.target_center.y,
                )
                assert err < 1e-3, (dist, size, err)

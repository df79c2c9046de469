import numpy as np
import pytest

from reachbench import DEFAULT_FIELD_LAWS, DEFAULT_GAIN_LAWS, plan_trajectory
from reachbench.fitting import RecordedTrial, identify_person_model
from reachbench.trials import SessionConfig, TrialOutcome, generate_session


def rollout_recording(trial, gains, field_laws, horizon=2.5):
    """Model rollout packaged as a recorded trial (the synthetic data source)."""
    plan = plan_trajectory(trial, gains, field_laws, horizon=horizon)
    times = np.arange(len(plan.positions)) * plan.dt
    return RecordedTrial(
        trial,
        times,
        plan.positions.copy(),
        plan.velocities.copy(),
        TrialOutcome(success=True, collided=False, movement_time=1.0),
    )


def synthesize_session(gains=DEFAULT_GAIN_LAWS, field_laws=DEFAULT_FIELD_LAWS, trials=90, seed=5):
    """Two balanced sets generated from known laws: one obstacle-free (gain
    identification), one with obstacles (field identification)."""
    recs = []
    for obstacle in (False, True):
        cfg = SessionConfig(trials_per_session=trials, seed=seed, obstacle_enabled=obstacle)
        for t in generate_session(cfg):
            recs.append(rollout_recording(t, gains, field_laws if obstacle else None))
    return recs


@pytest.fixture(scope="session")
def synthetic_recordings():
    return synthesize_session()


@pytest.fixture(scope="session")
def fitted_report(synthetic_recordings):
    return identify_person_model(synthetic_recordings)


@pytest.fixture(scope="session")
def fitted_model(fitted_report):
    return fitted_report.person_model()

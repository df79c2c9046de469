"""Scikit-learn style facade over the identification + planning core.

fit() runs the two-stage identification over recorded trials; predict() plans
reference movements for trial specs with the identified person model. The
estimator composes with sklearn tooling (get_params/set_params/clone).
"""

from __future__ import annotations

from typing import Optional, Sequence

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .avoidance import DEFAULT_PLAN_HORIZON, PersonModel, PlannedTrajectory, plan_trajectory
from .fitting import RecordedTrial, identify_person_model
from .trials import TrialSpec


class ObstacleAvoidancePlanner(BaseEstimator):
    """Identify a person's movement model from recorded trials and generate
    matching reference movements for new trials.

    Parameters
    ----------
    tau : float
        Timescale of the movement model.
    horizon : float
        Plan length in seconds.
    trim_rest : bool
        Drop the stationary head (reaction delay) of each recording before
        fitting.

    Attributes
    ----------
    gain_laws_ : GainLawCoeffs
        Identified stiffness/damping laws over the index of difficulty.
    field_laws_ : FieldLawCoeffs or None
        Identified field laws over the obstacle distance; None when the
        recordings lack enough distinct obstacle conditions.
    report_ : FitReport
        Full per-trial identification report.
    """

    def __init__(self, tau: float = 1.0, horizon: float = DEFAULT_PLAN_HORIZON, trim_rest: bool = True):
        self.tau = tau
        self.horizon = horizon
        self.trim_rest = trim_rest

    def fit(self, X: Sequence[RecordedTrial], y=None) -> "ObstacleAvoidancePlanner":
        """Identify the model from recorded trials (y is ignored; present for
        pipeline compatibility)."""
        trials = list(X)
        if not trials:
            raise ValueError("need at least one recorded trial")
        if not all(isinstance(t, RecordedTrial) for t in trials):
            raise TypeError("X must be a sequence of RecordedTrial")
        report = identify_person_model(trials, tau=self.tau, trim_rest=self.trim_rest)
        self.report_ = report
        self.person_model_ = report.person_model()
        self.gain_laws_ = report.gain_laws
        self.field_laws_ = report.field_laws
        return self

    def predict(self, X: Sequence[TrialSpec]) -> list[PlannedTrajectory]:
        """Plan the identified person's movement for each trial spec."""
        check_is_fitted(self, "person_model_")
        model: PersonModel = self.person_model_
        return [
            plan_trajectory(
                spec, model.gain_laws, model.field_laws, tau=model.tau, horizon=self.horizon
            )
            for spec in X
        ]

    def score(self, X: Sequence[RecordedTrial], y=None) -> float:
        """Negative mean position RMSE of the identified model against the
        given recordings' trials (higher is better)."""
        check_is_fitted(self, "person_model_")
        import numpy as np

        errs = []
        for rec in X:
            plan = self.predict([rec.trial])[0]
            n = min(len(plan.positions), len(rec.positions))
            errs.append(
                float(
                    np.sqrt(
                        np.mean(
                            np.sum((plan.positions[:n] - rec.positions[:n]) ** 2, axis=1)
                        )
                    )
                )
            )
        return -sum(errs) / len(errs)


def person_model_of(est: ObstacleAvoidancePlanner) -> Optional[PersonModel]:
    return getattr(est, "person_model_", None)

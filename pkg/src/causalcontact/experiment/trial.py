# Copyright (c) 2022, The causalcontact developers.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""Simulate randomized contact trials on synthetic worlds."""


import logging
from enum import Enum, unique
from typing import Dict, Sequence, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from pydantic import Field
from scipy.special import expit

from ..abstract_base import AbstractBase
from ..base_model import BaseModel
from ..data import Action, Dataset, SyntheticSpec, generate_synthetic
from ..exceptions import DataError
from ..helpers import derive_seeds
from ..policy import Recommendations
from ..policy.threshold import action_label
from .stats import two_proportion_test


__all__ = (
    "ControlContactKind",
    "ControlContactModel",
    "TrialConfig",
    "TrialResult",
    "COUNTS_COLUMNS",
    "simulate_trial",
    "null_rejection_rate",
)


logger = logging.getLogger(__name__)


COUNTS_COLUMNS = ("group", "recommendation", "n", "deliveries", "contacts", "compliant")
CONTROL = "control"
TREATMENT = "treatment"


@unique
class ControlContactKind(Enum):
    """Represent how the existing AE behavior is modeled."""

    Logged = "logged"
    Constant = "constant"
    Logistic = "logistic"


class ControlContactModel(BaseModel):
    """
    Describe the existing AE behavior without recommendations.

    Attributes:
        kind (ControlContactKind): 'logged' reuses the world's logging propensity,
            'constant' contacts with a fixed rate and 'logistic' applies the
            coefficients to the design columns.
        rate (float): The constant contact rate.
        intercept (float): The logistic intercept.
        coefficients (dict): The logistic slopes keyed by design column.

    """

    kind: ControlContactKind = ControlContactKind.Logged
    rate: float = Field(default=0.22, ge=0.0, le=1.0)
    intercept: float = 0.0
    coefficients: Dict[str, float] = Field(default_factory=dict)

    def contact_probability(self, world: Dataset) -> np.ndarray:
        """Return the probability that the AE contacts each row."""
        if self.kind is ControlContactKind.Constant:
            return np.full(len(world), self.rate)
        if self.kind is ControlContactKind.Logistic:
            names = list(self.coefficients)
            slopes = np.array([self.coefficients[name] for name in names])
            matrix = world.matrix(names)
            return expit(self.intercept + matrix @ slopes)
        if world.propensity is None:
            raise DataError(
                "The logged control model needs propensities on the world; choose a "
                "constant or logistic control model."
            )
        return np.asarray(world.propensity)


class TrialConfig(BaseModel):
    """
    Describe a randomized trial of a contact policy.

    Attributes:
        assignment_probability (float): The chance of an item joining the treatment
            group.
        treatment_compliance (float): The chance that the AE follows a
            recommendation in the treatment group.
        control_contact_model (ControlContactModel): The AE behavior otherwise.
        horizon_days (int): The outcome horizon.
        seed (int): The random seed.

    """

    assignment_probability: float = Field(default=0.5, ge=0.0, le=1.0)
    treatment_compliance: float = Field(default=0.54, ge=0.0, le=1.0)
    control_contact_model: ControlContactModel = Field(
        default_factory=ControlContactModel
    )
    horizon_days: int = Field(default=14, ge=1)
    seed: int = Field(default=0, ge=0)


class TrialResult(AbstractBase):
    """
    Hold the per-item records of a simulated trial.

    Attributes:
        ids (numpy.ndarray): The item identifiers.
        treated_group (numpy.ndarray): Whether each item is in the treatment group.
        recommendation (numpy.ndarray): The policy's recommended action.
        executed_action (numpy.ndarray): The action the AE took.
        outcome (numpy.ndarray): Whether the item was delivered.

    """

    _repr_attributes = ("n_control", "n_treatment")

    def __init__(
        self,
        *,
        ids: Sequence,
        treated_group: Sequence[bool],
        recommendation: Sequence[int],
        executed_action: Sequence[int],
        outcome: Sequence[int],
        **kwargs,
    ) -> None:
        """Initialize aligned trial records."""
        super().__init__(**kwargs)
        self.ids = np.asarray(ids)
        self.treated_group = np.asarray(treated_group, dtype=bool)
        self.recommendation = np.asarray(recommendation, dtype=np.int8)
        self.executed_action = np.asarray(executed_action, dtype=np.int8)
        self.outcome = np.asarray(outcome, dtype=np.int8)
        shapes = {
            array.shape
            for array in (
                self.ids,
                self.treated_group,
                self.recommendation,
                self.executed_action,
                self.outcome,
            )
        }
        if len(shapes) != 1:
            raise DataError("The trial records are not aligned.")
        self._freeze()

    @property
    def n_control(self) -> int:
        """Return the number of control items."""
        return int(np.sum(~self.treated_group))

    @property
    def n_treatment(self) -> int:
        """Return the number of treatment items."""
        return int(np.sum(self.treated_group))

    def to_frame(self) -> pd.DataFrame:
        """Return one row per item."""
        return pd.DataFrame(
            {
                "id": self.ids,
                "group": np.where(self.treated_group, TREATMENT, CONTROL),
                "recommendation": [action_label(a) for a in self.recommendation],
                "executed_action": [action_label(a) for a in self.executed_action],
                "outcome": self.outcome,
            }
        )

    def to_counts(self) -> pd.DataFrame:
        """
        Return the counts table by group and recommendation.

        An item is compliant when the executed action equals the recommendation,
        which for control items measures how often the existing behavior happened
        to agree with the policy.

        """
        records = []
        groups = ((CONTROL, ~self.treated_group), (TREATMENT, self.treated_group))
        for group, in_group in groups:
            for action in (Action.Contact, Action.NoContact):
                rows = in_group & (self.recommendation == action)
                executed = self.executed_action[rows]
                records.append(
                    {
                        "group": group,
                        "recommendation": action_label(action),
                        "n": int(rows.sum()),
                        "deliveries": int(self.outcome[rows].sum()),
                        "contacts": int((executed == Action.Contact).sum()),
                        "compliant": int((executed == action).sum()),
                    }
                )
        return pd.DataFrame(records, columns=list(COUNTS_COLUMNS))


def simulate_trial(
    world: Dataset,
    recommendations: Union[Recommendations, Sequence[int]],
    config: TrialConfig,
) -> TrialResult:
    """
    Simulate a randomized trial of recommendations on a synthetic world.

    Each item joins the treatment group with the assignment probability. In the
    treatment group the AE follows the recommendation with the compliance
    probability and otherwise behaves as in the control group, where the control
    contact model decides. The outcome is the item's potential outcome under the
    executed action.

    Raises:
        DataError: If the world has no potential outcomes or the recommendations
            are not aligned with it.

    """
    if not world.has_potential_outcomes:
        raise DataError("Simulating a trial requires potential outcomes on the world.")
    actions = (
        recommendations.actions
        if isinstance(recommendations, Recommendations)
        else np.asarray(recommendations, dtype=np.int8)
    )
    n = len(world)
    if actions.shape != (n,):
        raise DataError(f"Expected {n} recommendations but got {actions.size}.")
    rng = np.random.default_rng(config.seed)
    treated_group = rng.random(n) < config.assignment_probability
    complies = rng.random(n) < config.treatment_compliance
    control_action = (
        rng.random(n) < config.control_contact_model.contact_probability(world)
    ).astype(np.int8)
    executed = np.where(treated_group & complies, actions, control_action)
    executed = executed.astype(np.int8)
    outcome = np.where(executed == Action.Contact, world.y1, world.y0)
    return TrialResult(
        ids=world.ids,
        treated_group=treated_group,
        recommendation=actions,
        executed_action=executed,
        outcome=outcome,
    )


def _null_trial(
    spec: SyntheticSpec, config: TrialConfig, seed: int, alpha: float
) -> bool:
    world = generate_synthetic(spec.copy(update={"seed": seed}))
    result = simulate_trial(
        world,
        np.full(len(world), Action.Contact, dtype=np.int8),
        config.copy(update={"seed": seed}),
    )
    control = ~result.treated_group
    p_value = two_proportion_test(
        int(result.outcome[control].sum()),
        int(control.sum()),
        int(result.outcome[result.treated_group].sum()),
        int(result.treated_group.sum()),
    )
    return p_value < alpha


def null_rejection_rate(
    spec: SyntheticSpec,
    config: TrialConfig,
    n_trials: int = 200,
    alpha: float = 0.05,
    seed: int = 0,
    n_jobs: int = 1,
) -> float:
    """
    Return how often the one-sided test rejects across seeded simulated trials.

    Every trial draws a fresh world from `spec` and a fresh assignment, both with
    a seed derived from `seed` and the trial index; the treatment group is
    recommended contact for every item. Under a world without effect the rate
    estimates the test's size.

    """
    if n_trials < 1:
        raise DataError(f"At least one trial is required, got {n_trials}.")
    seeds = derive_seeds(seed, n_trials)
    rejections = Parallel(n_jobs=n_jobs)(
        delayed(_null_trial)(spec, config, trial_seed, alpha) for trial_seed in seeds
    )
    rate = float(np.mean(rejections))
    logger.info("The test rejected in %.1f%% of %d null trials.", 100 * rate, n_trials)
    return rate

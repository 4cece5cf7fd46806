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


"""Compare the value of the new policy with the existing and constant policies."""


import logging
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
from pydantic import Field

from ..base_model import FORMAT_VERSION, BaseModel, DocumentModel
from ..data import Action, Dataset
from ..exceptions import DataError
from .estimators import (
    DEFAULT_N_REPS,
    OpeEstimate,
    bootstrap_ratios,
    importance_weights,
    interval_from_replicates,
    snips,
)


__all__ = (
    "PolicyValueReport",
    "DayComparison",
    "DaySelection",
    "POLICY_NAMES",
    "policy_value_report",
    "oracle_policy_value",
    "compare_decision_days",
)


logger = logging.getLogger(__name__)


POLICY_NAMES = ("new", "existing", "always", "never")


class PolicyValueReport(DocumentModel):
    """
    Hold the estimated values of four policies on the same logged rows.

    Attributes:
        n_rows (int): The number of evaluated rows.
        threshold (float): The CATE threshold of the new policy.
        propensity_source (str): Where the propensities came from.
        estimates (dict): The estimate per policy name: 'new', 'existing',
            'always' and 'never'; every estimate carries its contact rate.
        oracle_values (dict, optional): The true values on synthetic potential
            outcomes.

    """

    n_rows: int = Field(..., alias="nRows", ge=1)
    threshold: float
    propensity_source: str = Field(..., alias="propensitySource")
    estimates: Dict[str, OpeEstimate]
    oracle_values: Optional[Dict[str, float]] = Field(
        default=None, alias="oracleValues"
    )

    @property
    def added_value(self) -> float:
        """Return the estimated value of the new policy minus the existing one."""
        return self.estimates["new"].value - self.estimates["existing"].value


def oracle_policy_value(dataset: Dataset, policy_actions: Sequence[int]) -> float:
    """
    Return the true value of a policy from synthetic potential outcomes.

    Raises:
        DataError: If the dataset carries no potential outcomes.

    """
    if not dataset.has_potential_outcomes:
        raise DataError("The oracle value requires potential outcomes on the dataset.")
    policy_actions = np.asarray(policy_actions)
    if policy_actions.shape != (len(dataset),):
        raise DataError(
            f"Expected {len(dataset)} policy actions but got {policy_actions.size}."
        )
    outcomes = np.where(policy_actions == Action.Contact, dataset.y1, dataset.y0)
    return float(np.mean(outcomes))


def policy_value_report(
    dataset: Dataset,
    cate_scores: Sequence[float],
    existing_actions: Optional[Sequence[int]] = None,
    threshold: float = 0.0,
    n_reps: int = DEFAULT_N_REPS,
    level: float = 0.95,
    seed: int = 0,
    n_jobs: int = 1,
) -> PolicyValueReport:
    """
    Estimate the new, existing, always-contact and never-contact policy values.

    The new policy contacts rows whose CATE estimate reaches `threshold`. The
    existing policy's recommendations are the logged actions unless given. All
    four intervals share their bootstrap resamples.

    Raises:
        DataError: If propensities are absent or the inputs are not aligned.
        NoOverlapError: If any policy matches no logged action.

    """
    n = len(dataset)
    if dataset.propensity is None:
        raise DataError("Off-policy evaluation requires propensities on the dataset.")
    scores = np.asarray(cate_scores, dtype=float)
    if scores.shape != (n,):
        raise DataError(f"Expected {n} scores but got {scores.size}.")
    existing = dataset.action if existing_actions is None else existing_actions
    policies = {
        "new": np.where(scores >= threshold, Action.Contact, Action.NoContact),
        "existing": np.asarray(existing, dtype=np.int8),
        "always": np.full(n, Action.Contact, dtype=np.int8),
        "never": np.full(n, Action.NoContact, dtype=np.int8),
    }
    estimates = {name: snips(dataset, actions) for name, actions in policies.items()}
    weights = np.column_stack(
        [
            importance_weights(dataset.action, dataset.propensity, actions)
            for actions in policies.values()
        ]
    )
    replicates = bootstrap_ratios(weights, dataset.outcome, n_reps, seed, n_jobs)
    for j, name in enumerate(policies):
        estimates[name] = estimates[name].with_interval(
            interval_from_replicates(replicates[:, j], level)
        )
    oracle = None
    if dataset.has_potential_outcomes:
        oracle = {
            name: oracle_policy_value(dataset, actions)
            for name, actions in policies.items()
        }
    report = PolicyValueReport(
        format_version=FORMAT_VERSION,
        n_rows=n,
        threshold=threshold,
        propensity_source=dataset.propensity_source or "logged",
        estimates=estimates,
        oracle_values=oracle,
    )
    logger.info(
        "New policy %.4f vs existing %.4f (contact rates %.2f vs %.2f).",
        estimates["new"].value,
        estimates["existing"].value,
        estimates["new"].contact_rate,
        estimates["existing"].contact_rate,
    )
    return report


class DayComparison(BaseModel):
    """Summarize the policy comparison of one episode day."""

    day: int = Field(..., ge=1)
    new_value: float = Field(..., alias="newValue")
    existing_value: float = Field(..., alias="existingValue")
    added_value: float = Field(..., alias="addedValue")
    new_contact_rate: float = Field(..., alias="newContactRate")


class DaySelection(DocumentModel):
    """
    Rank episode days by the added value of the new policy.

    Attributes:
        days (list of DayComparison): The comparisons by ascending day.
        best_day (int): The day with the largest added value; ties go to the
            earliest day.

    """

    days: List[DayComparison] = Field(..., min_items=1)
    best_day: int = Field(..., alias="bestDay", ge=1)


def compare_decision_days(reports: Mapping[int, PolicyValueReport]) -> DaySelection:
    """
    Select the episode day on which the new policy adds the most value.

    Raises:
        DataError: If no report is given.

    """
    if not reports:
        raise DataError("At least one daily report is required to select a day.")
    days = [
        DayComparison(
            day=day,
            new_value=report.estimates["new"].value,
            existing_value=report.estimates["existing"].value,
            added_value=report.added_value,
            new_contact_rate=report.estimates["new"].contact_rate,
        )
        for day, report in sorted(reports.items())
    ]
    best = max(days, key=lambda item: (item.added_value, -item.day))
    logger.info("Day %d has the largest added value %.4f.", best.day, best.added_value)
    return DaySelection(format_version=FORMAT_VERSION, days=days, best_day=best.day)

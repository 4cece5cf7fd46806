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


"""Provide the self-normalized importance sampling estimator and its bootstrap."""


import logging
from typing import List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from pydantic import Field, root_validator

from ..abstract_base import AbstractBase
from ..base_model import BaseModel
from ..data import Action, Dataset
from ..exceptions import DataError, EstimationError, NoOverlapError
from ..helpers import derive_seeds


__all__ = (
    "OpeEstimate",
    "BootstrapInterval",
    "importance_weights",
    "snips_from_weights",
    "snips",
    "bootstrap_ci",
    "bootstrap_ratios",
    "interval_from_replicates",
    "DEFAULT_N_REPS",
    "MAX_DEGENERATE_SHARE",
)


logger = logging.getLogger(__name__)


DEFAULT_N_REPS = 1000
MAX_DEGENERATE_SHARE = 0.5
_CHUNK_SIZE = 50


class OpeEstimate(BaseModel):
    """
    Represent the estimated value of a deterministic policy on logged data.

    Attributes:
        value (float): The expected outcome rate under the policy.
        ci_low (float): The lower interval bound, at most `value`.
        ci_high (float): The upper interval bound, at least `value`.
        effective_sample_size (float): The Kish effective sample size of the
            importance weights.
        n_matched (int): Rows whose logged action the policy agrees with.
        standard_error (float, optional): The bootstrap standard error.
        contact_rate (float, optional): The share of rows the policy contacts.
        flagged (bool): Whether the interval could not be estimated reliably.

    """

    value: float
    ci_low: float = Field(..., alias="ciLow")
    ci_high: float = Field(..., alias="ciHigh")
    effective_sample_size: float = Field(..., alias="effectiveSampleSize", ge=0.0)
    n_matched: int = Field(..., alias="nMatched", ge=0)
    standard_error: Optional[float] = Field(default=None, alias="standardError")
    contact_rate: Optional[float] = Field(
        default=None, alias="contactRate", ge=0.0, le=1.0
    )
    flagged: bool = False

    @root_validator(skip_on_failure=True)
    def check_interval(cls, values: dict) -> dict:
        """Require the interval to contain the estimate."""
        if not values["ci_low"] <= values["value"] <= values["ci_high"]:
            raise ValueError(
                f"The interval [{values['ci_low']}, {values['ci_high']}] does not "
                f"contain the estimate {values['value']}."
            )
        return values

    @property
    def halfwidth(self) -> float:
        """Return half the interval width."""
        return (self.ci_high - self.ci_low) / 2.0

    def with_interval(self, interval: "BootstrapInterval") -> "OpeEstimate":
        """
        Return a copy carrying a bootstrap interval.

        Percentile bounds that exclude the point estimate are widened to it.

        """
        return self.copy(
            update={
                "ci_low": min(interval.low, self.value),
                "ci_high": max(interval.high, self.value),
                "standard_error": interval.standard_error,
            }
        )


class BootstrapInterval(AbstractBase):
    """
    Hold a percentile bootstrap interval.

    Attributes:
        low (float): The lower percentile.
        high (float): The upper percentile.
        standard_error (float): The standard deviation of the replicates.
        n_skipped (int): Replicates without any matched weight.
        n_reps (int): All replicates drawn.

    """

    _repr_attributes = ("low", "high", "n_skipped")

    def __init__(
        self,
        *,
        low: float,
        high: float,
        standard_error: float,
        n_skipped: int,
        n_reps: int,
        **kwargs,
    ) -> None:
        """Initialize an interval."""
        super().__init__(**kwargs)
        self.low = float(low)
        self.high = float(high)
        self.standard_error = float(standard_error)
        self.n_skipped = int(n_skipped)
        self.n_reps = int(n_reps)
        self._freeze()


def importance_weights(
    actions: np.ndarray, propensity: np.ndarray, policy_actions: np.ndarray
) -> np.ndarray:
    """
    Return the importance weight of a deterministic policy for every row.

    The weight is the indicator of agreement with the logged action divided by the
    probability of the logged action.

    """
    logged = np.where(actions == Action.Contact, propensity, 1.0 - propensity)
    return (np.asarray(policy_actions) == actions) / logged


def snips_from_weights(weights: np.ndarray, outcomes: np.ndarray) -> float:
    """
    Return the self-normalized weighted mean of the outcomes.

    Raises:
        NoOverlapError: If all weights are zero.

    """
    total = weights.sum()
    if total <= 0:
        raise NoOverlapError(
            "The policy never agrees with the logged actions; its value cannot be "
            "estimated from these logs."
        )
    return float(np.dot(weights, outcomes) / total)


def _aligned(dataset: Dataset, policy_actions: Sequence[int]) -> np.ndarray:
    if dataset.propensity is None:
        raise DataError("Off-policy evaluation requires propensities on the dataset.")
    policy_actions = np.asarray(policy_actions, dtype=np.int8)
    if policy_actions.shape != (len(dataset),):
        raise DataError(
            f"Expected {len(dataset)} policy actions but got {policy_actions.size}."
        )
    return policy_actions


def snips(dataset: Dataset, policy_actions: Sequence[int]) -> OpeEstimate:
    """
    Estimate a deterministic policy's value by self-normalized importance sampling.

    The returned interval is degenerate at the estimate; use `bootstrap_ci` for a
    confidence interval.

    Args:
        dataset (Dataset): The logged rows with their propensities.
        policy_actions (sequence of int): The policy's action per row.

    Returns:
        OpeEstimate: The estimate with its effective sample size.

    Raises:
        DataError: If propensities are absent or the actions are not aligned.
        NoOverlapError: If the policy agrees with no logged action.

    """
    policy_actions = _aligned(dataset, policy_actions)
    weights = importance_weights(dataset.action, dataset.propensity, policy_actions)
    value = snips_from_weights(weights, dataset.outcome)
    return OpeEstimate(
        value=value,
        ci_low=value,
        ci_high=value,
        effective_sample_size=float(weights.sum() ** 2 / np.sum(weights**2)),
        n_matched=int(np.count_nonzero(weights)),
        contact_rate=float(np.mean(policy_actions == Action.Contact))
        if len(dataset)
        else None,
    )


def _replicate_chunk(
    weights: np.ndarray, weighted_outcomes: np.ndarray, seeds: Sequence[int]
) -> np.ndarray:
    n = weights.shape[0]
    result = np.empty((len(seeds), weights.shape[1]))
    for i, seed in enumerate(seeds):
        sample = np.random.default_rng(seed).integers(0, n, size=n)
        counts = np.bincount(sample, minlength=n).astype(float)
        totals = counts @ weights
        with np.errstate(invalid="ignore", divide="ignore"):
            result[i] = np.where(
                totals > 0, (counts @ weighted_outcomes) / totals, np.nan
            )
    return result


def bootstrap_ratios(
    weights: np.ndarray,
    outcomes: np.ndarray,
    n_reps: int = DEFAULT_N_REPS,
    seed: int = 0,
    n_jobs: int = 1,
) -> np.ndarray:
    """
    Return bootstrap replicates of several self-normalized estimates at once.

    Every replicate resamples the rows once, with a seed derived from `seed` and
    the replicate index, and evaluates all weight columns on that resample, so
    the estimates share their resamples. Results do not depend on `n_jobs`.

    Args:
        weights: Shape (n_rows, n_policies), the importance weights.
        outcomes: The outcome per row.
        n_reps: The number of replicates.
        seed: The master seed.
        n_jobs: The number of parallel workers.

    Returns:
        numpy.ndarray: Shape (n_reps, n_policies); NaN marks replicates in which a
            policy matched no row.

    """
    if n_reps < 1:
        raise DataError(f"At least one bootstrap replicate is required, got {n_reps}.")
    weights = np.asarray(weights, dtype=float)
    weighted_outcomes = weights * np.asarray(outcomes, dtype=float)[:, np.newaxis]
    seeds = derive_seeds(seed, n_reps)
    chunks: List[List[int]] = [
        seeds[start : start + _CHUNK_SIZE] for start in range(0, n_reps, _CHUNK_SIZE)
    ]
    results = Parallel(n_jobs=n_jobs)(
        delayed(_replicate_chunk)(weights, weighted_outcomes, chunk) for chunk in chunks
    )
    return np.vstack(results)


def interval_from_replicates(replicates: np.ndarray, level: float) -> BootstrapInterval:
    """
    Return the percentile interval of one column of bootstrap replicates.

    Raises:
        NoOverlapError: If more than half of the replicates are degenerate.

    """
    valid = replicates[~np.isnan(replicates)]
    n_skipped = int(replicates.size - valid.size)
    if n_skipped > MAX_DEGENERATE_SHARE * replicates.size:
        raise NoOverlapError(
            f"{n_skipped} of {replicates.size} bootstrap replicates matched no logged "
            f"action; the overlap is too poor for an interval."
        )
    if n_skipped:
        logger.warning(
            "Skipped %d of %d degenerate bootstrap replicates.",
            n_skipped,
            replicates.size,
        )
    low, high = np.quantile(valid, [(1.0 - level) / 2.0, (1.0 + level) / 2.0])
    return BootstrapInterval(
        low=low,
        high=high,
        standard_error=float(np.std(valid, ddof=1)) if valid.size > 1 else 0.0,
        n_skipped=n_skipped,
        n_reps=replicates.size,
    )


def bootstrap_ci(
    dataset: Dataset,
    policy_actions: Sequence[int],
    n_reps: int = DEFAULT_N_REPS,
    level: float = 0.95,
    seed: int = 0,
    n_jobs: int = 1,
) -> BootstrapInterval:
    """
    Return a percentile bootstrap interval of a policy's SNIPS value.

    Replicates whose resample matches no logged action are skipped and counted.

    Raises:
        NoOverlapError: If the policy matches no row of the dataset or more than
            half of the replicates are degenerate.
        EstimationError: If the level is outside (0, 1).

    """
    if not 0.0 < level < 1.0:
        raise EstimationError(f"The confidence level must lie in (0, 1), got {level}.")
    policy_actions = _aligned(dataset, policy_actions)
    weights = importance_weights(dataset.action, dataset.propensity, policy_actions)
    snips_from_weights(weights, dataset.outcome)
    replicates = bootstrap_ratios(
        weights[:, np.newaxis], dataset.outcome, n_reps, seed, n_jobs
    )
    return interval_from_replicates(replicates[:, 0], level)

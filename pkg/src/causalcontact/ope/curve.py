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


"""Provide the policy value curve over the contacted share of the population."""


import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..abstract_base import AbstractBase
from ..data import Action, Dataset
from ..evaluation.qini import id_ranks
from ..exceptions import DataError, NoOverlapError
from ..helpers import derive_seed
from .estimators import (
    DEFAULT_N_REPS,
    OpeEstimate,
    bootstrap_ratios,
    importance_weights,
    interval_from_replicates,
    snips,
)


__all__ = ("OpeCurve", "ope_curve", "top_fraction_actions", "CURVE_COLUMNS")


logger = logging.getLogger(__name__)


CURVE_COLUMNS = ("fraction", "value", "ci_low", "ci_high", "ess", "ordering")


class OpeCurve(AbstractBase):
    """
    Represent estimated policy values as a function of the contacted share.

    Attributes:
        ordering (str): How rows were ranked, 'cate' or 'random'.
        fractions (numpy.ndarray): The contacted shares from 0 to 1.
        estimates (tuple): One `OpeEstimate` per fraction, `None` where the policy
            matched no logged action.

    """

    _repr_attributes = ("ordering", "n_points")

    def __init__(
        self,
        *,
        ordering: str,
        fractions: Sequence[float],
        estimates: Sequence[Optional[OpeEstimate]],
        **kwargs,
    ) -> None:
        """Initialize a curve from aligned fractions and estimates."""
        super().__init__(**kwargs)
        self.ordering = ordering
        self.fractions = np.asarray(fractions, dtype=float)
        self.estimates = tuple(estimates)
        if self.fractions.shape != (len(self.estimates),):
            raise DataError("The curve fractions and estimates are not aligned.")
        if self.fractions.size < 2 or self.fractions[0] != 0 or self.fractions[-1] != 1:
            raise DataError("An OPE curve must include the fractions 0 and 1.")
        if np.any(np.diff(self.fractions) < 0):
            raise DataError("The curve fractions must be non-decreasing.")
        self._freeze()

    @property
    def n_points(self) -> int:
        """Return the number of points."""
        return len(self.estimates)

    @property
    def values(self) -> np.ndarray:
        """Return the estimated values, NaN at degenerate points."""
        return np.array(
            [np.nan if e is None else e.value for e in self.estimates], dtype=float
        )

    def to_frame(self) -> pd.DataFrame:
        """Return the `fraction,value,ci_low,ci_high,ess,ordering` table."""
        rows = []
        for fraction, estimate in zip(self.fractions, self.estimates):
            rows.append(
                {
                    "fraction": fraction,
                    "value": None if estimate is None else estimate.value,
                    "ci_low": None if estimate is None else estimate.ci_low,
                    "ci_high": None if estimate is None else estimate.ci_high,
                    "ess": None if estimate is None else estimate.effective_sample_size,
                    "ordering": self.ordering,
                }
            )
        return pd.DataFrame(rows, columns=list(CURVE_COLUMNS))


def top_fraction_actions(
    scores: np.ndarray, ids: Optional[Sequence], n_contacts: int
) -> np.ndarray:
    """Return actions contacting the `n_contacts` highest scores, ties by id."""
    n = scores.shape[0]
    order = np.lexsort((id_ranks(ids, n), -scores))
    actions = np.full(n, Action.NoContact, dtype=np.int8)
    actions[order[:n_contacts]] = Action.Contact
    return actions


def _curve(
    dataset: Dataset,
    scores: np.ndarray,
    ordering: str,
    n_grid: int,
    n_reps: int,
    level: float,
    seed: int,
    n_jobs: int,
) -> OpeCurve:
    n = len(dataset)
    fractions = np.arange(n_grid + 1) / n_grid
    policies = [
        top_fraction_actions(scores, dataset.ids, int(round(fraction * n)))
        for fraction in fractions
    ]
    weights = np.column_stack(
        [importance_weights(dataset.action, dataset.propensity, p) for p in policies]
    )
    replicates = bootstrap_ratios(weights, dataset.outcome, n_reps, seed, n_jobs)
    estimates: List[Optional[OpeEstimate]] = []
    for j, policy in enumerate(policies):
        try:
            estimate = snips(dataset, policy)
        except NoOverlapError:
            logger.warning(
                "The %s-ordered policy at fraction %.3f matches no logged action.",
                ordering,
                fractions[j],
            )
            estimates.append(None)
            continue
        try:
            estimate = estimate.with_interval(
                interval_from_replicates(replicates[:, j], level)
            )
        except NoOverlapError:
            logger.warning(
                "The %s-ordered point at fraction %.3f has no reliable interval.",
                ordering,
                fractions[j],
            )
            estimate = estimate.copy(update={"flagged": True})
        estimates.append(estimate)
    return OpeCurve(ordering=ordering, fractions=fractions, estimates=estimates)


def ope_curve(
    dataset: Dataset,
    cate_scores: Sequence[float],
    n_grid: int = 50,
    n_reps: int = DEFAULT_N_REPS,
    level: float = 0.95,
    seed: int = 0,
    n_jobs: int = 1,
) -> Tuple[OpeCurve, OpeCurve]:
    """
    Estimate policy values while contacting a growing share of the population.

    For each fraction `k / n_grid` the policy contacts exactly the
    `round(fraction * n)` rows with the highest scores (ties by id). The first
    point is therefore the never-contact policy and the last the always-contact
    policy. A companion curve ranks the rows in a seeded random order.

    Args:
        dataset: The logged rows with their propensities.
        cate_scores: The CATE estimate per row.
        n_grid: The number of fraction steps.
        n_reps: The number of bootstrap replicates per curve.
        level: The confidence level.
        seed: The master seed of the random ordering and the bootstrap.
        n_jobs: The number of parallel workers.

    Returns:
        tuple: The CATE-ordered and the random-ordered curve.

    """
    if n_grid < 1:
        raise DataError(f"The curve needs at least one step, got n_grid={n_grid}.")
    if dataset.propensity is None:
        raise DataError("Off-policy evaluation requires propensities on the dataset.")
    scores = np.asarray(cate_scores, dtype=float)
    if scores.shape != (len(dataset),):
        raise DataError(f"Expected {len(dataset)} scores but got {scores.size}.")
    bootstrap_seed = derive_seed(seed, "ope-curve-bootstrap")
    order_rng = np.random.default_rng(derive_seed(seed, "ope-curve-order"))
    random_scores = order_rng.permutation(len(dataset)).astype(float)
    return (
        _curve(dataset, scores, "cate", n_grid, n_reps, level, bootstrap_seed, n_jobs),
        _curve(
            dataset,
            random_scores,
            "random",
            n_grid,
            n_reps,
            level,
            bootstrap_seed,
            n_jobs,
        ),
    )

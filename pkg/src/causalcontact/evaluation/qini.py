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


"""Provide Qini curves and normalized Qini coefficients."""


import logging
from enum import Enum, unique
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

from ..abstract_base import AbstractBase
from ..data import Action
from ..exceptions import DataError


__all__ = (
    "QiniReference",
    "QiniCurve",
    "qini_curve",
    "qini_coefficient",
    "outcome_optimal_scores",
    "id_ranks",
)


logger = logging.getLogger(__name__)


@unique
class QiniReference(Enum):
    """Represent the optimal ranking a Qini coefficient is normalized against."""

    GroundTruth = "ground_truth_ranking"
    OutcomeOptimal = "outcome_optimal"


class QiniCurve(AbstractBase):
    """
    Represent the cumulative incremental successes over a ranked population.

    Attributes:
        fractions (numpy.ndarray): The targeted fraction, starting at 0.
        values (numpy.ndarray): The incremental successes, starting at 0.

    """

    _repr_attributes = ("n_points",)

    def __init__(
        self, *, fractions: Sequence[float], values: Sequence[float], **kwargs
    ) -> None:
        """Initialize a curve from aligned points."""
        super().__init__(**kwargs)
        self.fractions = np.asarray(fractions, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.fractions.shape != self.values.shape or self.fractions.size < 2:
            raise DataError("A Qini curve needs at least two aligned points.")
        if self.fractions[0] != 0.0 or self.values[0] != 0.0:
            raise DataError("A Qini curve starts at the origin.")
        if np.any(np.diff(self.fractions) <= 0):
            raise DataError("The targeted fractions must be strictly increasing.")
        self._freeze()

    @property
    def n_points(self) -> int:
        """Return the number of points including the origin."""
        return int(self.fractions.size)

    @property
    def area(self) -> float:
        """Return the trapezoid area under the curve."""
        return float(trapezoid(self.values, self.fractions))

    @property
    def random_area(self) -> float:
        """Return the area under the chord from the origin to the endpoint."""
        return float(self.values[-1] * self.fractions[-1] / 2.0)

    def to_frame(self) -> pd.DataFrame:
        """Return the `fraction,qini` table."""
        return pd.DataFrame({"fraction": self.fractions, "qini": self.values})


def id_ranks(ids: Optional[Sequence], n: int) -> np.ndarray:
    """Return the ascending rank of every id, or the position when ids are absent."""
    if ids is None:
        return np.arange(n)
    return np.unique(np.asarray(ids), return_inverse=True)[1].reshape(-1)


def qini_curve(
    scores: Sequence[float],
    actions: Sequence[int],
    outcomes: Sequence[int],
    ids: Optional[Sequence] = None,
) -> QiniCurve:
    """
    Compute the Qini curve of a ranking.

    Rows are ranked by descending score with ties broken by ascending id (by
    position when `ids` is omitted). After the first k rows the curve is at
    `Y_t(k) - Y_c(k) * N_t(k) / N_c(k)`, where the second term is zero while no
    control row has been seen.

    Raises:
        DataError: If the inputs are not aligned or only one action is present.

    """
    scores = np.asarray(scores, dtype=float)
    treated = np.asarray(actions) == Action.Contact
    outcomes = np.asarray(outcomes, dtype=float)
    n = scores.size
    if not scores.shape == treated.shape == outcomes.shape:
        raise DataError("The scores, actions and outcomes are not aligned.")
    if treated.all() or not treated.any():
        raise DataError("Both actions must be present to compute a Qini curve.")
    order = np.lexsort((id_ranks(ids, n), -scores))
    t = treated[order]
    y = outcomes[order]
    n_t = np.cumsum(t)
    n_c = np.cumsum(~t)
    y_t = np.cumsum(y * t)
    y_c = np.cumsum(y * ~t)
    scaled = np.divide(y_c * n_t, n_c, out=np.zeros(n), where=n_c > 0)
    return QiniCurve(
        fractions=np.concatenate([[0.0], np.arange(1, n + 1) / n]),
        values=np.concatenate([[0.0], y_t - scaled]),
    )


def outcome_optimal_scores(
    actions: Sequence[int], outcomes: Sequence[int]
) -> np.ndarray:
    """
    Return scores ranking treated positives and control negatives first.

    The remaining treated negatives come next and control positives last.

    """
    treated = np.asarray(actions) == Action.Contact
    positive = np.asarray(outcomes) == 1
    return np.select(
        [treated & positive, ~treated & ~positive, treated & ~positive],
        [3.0, 2.0, 1.0],
        default=0.0,
    )


def qini_coefficient(
    curve: QiniCurve,
    reference: QiniReference,
    actions: Sequence[int],
    outcomes: Sequence[int],
    true_cate: Optional[Sequence[float]] = None,
    ids: Optional[Sequence] = None,
) -> float:
    """
    Normalize the area between a Qini curve and the chord by an optimal ranking.

    The coefficient is `(A_model - A_random) / (A_optimal - A_random)` with
    trapezoid areas over the targeted fraction. The optimal curve ranks rows by
    `true_cate` for `QiniReference.GroundTruth` or by the observable outcome
    ordering for `QiniReference.OutcomeOptimal`.

    Args:
        curve: The Qini curve of the model scores.
        reference: The optimal ranking to normalize against.
        actions: The logged actions the curve was computed on.
        outcomes: The outcomes the curve was computed on.
        true_cate: The true effects, required for the ground-truth reference.
        ids: The row identifiers used for tie-breaking.

    Returns:
        float: The coefficient, or NaN when the optimal ranking does not beat the
            chord.

    Raises:
        DataError: If the ground-truth reference lacks `true_cate`.

    """
    reference = QiniReference(reference)
    if reference is QiniReference.GroundTruth:
        if true_cate is None:
            raise DataError("The ground-truth Qini reference requires true effects.")
        optimal_scores = np.asarray(true_cate, dtype=float)
    else:
        optimal_scores = outcome_optimal_scores(actions, outcomes)
    optimal = qini_curve(optimal_scores, actions, outcomes, ids)
    if optimal.n_points != curve.n_points:
        raise DataError("The Qini curve and the reference cover different rows.")
    denominator = optimal.area - optimal.random_area
    if abs(denominator) < 1e-12:
        logger.warning(
            "The %s reference does not beat random targeting; the Qini coefficient is "
            "undefined.",
            reference.value,
        )
        return float("nan")
    return (curve.area - curve.random_area) / denominator

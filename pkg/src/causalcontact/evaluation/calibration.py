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


"""Provide the CATE calibration report over equal-frequency bins."""


import logging
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import Field
from scipy.stats import norm

from ..base_model import FORMAT_VERSION, BaseModel, DocumentModel
from ..data import Action, Dataset
from ..exceptions import DataError
from .qini import id_ranks


__all__ = ("CalibrationBin", "CalibrationReport", "calibration", "ipw_uplift")


logger = logging.getLogger(__name__)


class CalibrationBin(BaseModel):
    """
    Compare predicted and observed uplift within one bin.

    Attributes:
        mean_predicted_cate (float): The mean prediction of the bin's rows.
        observed_uplift (float, optional): The inverse-propensity weighted
            difference of treated and control outcome means; absent when the bin
            lacks an arm.
        n_rows (int): The number of rows.
        n_treated (int): The number of treated rows.
        n_control (int): The number of control rows.
        ci_halfwidth (float, optional): The normal-approximation half-width.
        flagged (bool): Whether the bin lacks an arm.

    """

    mean_predicted_cate: float = Field(..., alias="meanPredictedCate")
    observed_uplift: Optional[float] = Field(default=None, alias="observedUplift")
    n_rows: int = Field(..., alias="nRows", ge=1)
    n_treated: int = Field(..., alias="nTreated", ge=0)
    n_control: int = Field(..., alias="nControl", ge=0)
    ci_halfwidth: Optional[float] = Field(default=None, alias="ciHalfwidth", ge=0.0)
    flagged: bool = False


class CalibrationReport(DocumentModel):
    """Hold the calibration bins ordered by predicted CATE."""

    level: float = Field(..., gt=0.0, lt=1.0)
    bins: List[CalibrationBin]

    def to_frame(self) -> pd.DataFrame:
        """Return one row per bin."""
        return pd.DataFrame(
            [
                {
                    "bin": index,
                    "mean_predicted_cate": item.mean_predicted_cate,
                    "observed_uplift": item.observed_uplift,
                    "ci_halfwidth": item.ci_halfwidth,
                    "n_rows": item.n_rows,
                    "n_treated": item.n_treated,
                    "n_control": item.n_control,
                    "flagged": item.flagged,
                }
                for index, item in enumerate(self.bins)
            ]
        )


def ipw_uplift(
    actions: np.ndarray,
    outcomes: np.ndarray,
    propensity: np.ndarray,
    level: float = 0.95,
) -> Optional[tuple]:
    """
    Return the weighted treated-minus-control mean difference and its half-width.

    Each arm's mean is self-normalized by its inverse-propensity weights and its
    variance follows the delta method. Returns `None` when an arm is absent.

    """
    treated = actions == Action.Contact
    w_t = np.where(treated, 1.0 / propensity, 0.0)
    w_c = np.where(treated, 0.0, 1.0 / (1.0 - propensity))
    if w_t.sum() == 0 or w_c.sum() == 0:
        return None
    mean_t = np.sum(w_t * outcomes) / w_t.sum()
    mean_c = np.sum(w_c * outcomes) / w_c.sum()
    variance = np.sum(w_t**2 * (outcomes - mean_t) ** 2) / w_t.sum() ** 2 + np.sum(
        w_c**2 * (outcomes - mean_c) ** 2
    ) / w_c.sum() ** 2
    z = norm.ppf(0.5 + level / 2.0)
    return float(mean_t - mean_c), float(z * np.sqrt(variance))


def calibration(
    predictions: Sequence[float],
    dataset: Dataset,
    n_bins: int = 10,
    level: float = 0.95,
) -> CalibrationReport:
    """
    Compare predicted CATE with the observed uplift in equal-frequency bins.

    Rows are ordered by prediction (ties by id) and cut into `n_bins` bins whose
    sizes differ by at most one. A bin without treated or without control rows
    is flagged and carries no observed uplift.

    Args:
        predictions: The CATE estimate per row.
        dataset: The rows, carrying their (trimmed) propensities.
        n_bins: The number of bins.
        level: The confidence level of the per-bin intervals.

    Raises:
        DataError: If propensities are absent, the predictions are not aligned or
            there are fewer than two rows per bin.

    """
    predictions = np.asarray(predictions, dtype=float)
    n = len(dataset)
    if dataset.propensity is None:
        raise DataError("Calibration requires propensities on the dataset.")
    if predictions.shape != (n,):
        raise DataError(f"Expected {n} predictions but got {predictions.size}.")
    if n_bins < 1 or n < 2 * n_bins:
        raise DataError(
            f"Calibration with {n_bins} bins needs at least {2 * max(n_bins, 1)} rows "
            f"so that every bin can hold both actions; got {n}."
        )
    order = np.lexsort((id_ranks(dataset.ids, n), predictions))
    bins = []
    for rows in np.array_split(order, n_bins):
        actions = dataset.action[rows]
        estimate = ipw_uplift(
            actions,
            dataset.outcome[rows].astype(float),
            dataset.propensity[rows],
            level,
        )
        n_treated = int(np.sum(actions == Action.Contact))
        if estimate is None:
            logger.warning(
                "A calibration bin of %d rows lacks an action and is flagged.",
                rows.size,
            )
        bins.append(
            CalibrationBin(
                mean_predicted_cate=float(np.mean(predictions[rows])),
                observed_uplift=None if estimate is None else estimate[0],
                n_rows=int(rows.size),
                n_treated=n_treated,
                n_control=int(rows.size) - n_treated,
                ci_halfwidth=None if estimate is None else estimate[1],
                flagged=estimate is None,
            )
        )
    return CalibrationReport(format_version=FORMAT_VERSION, level=level, bins=bins)

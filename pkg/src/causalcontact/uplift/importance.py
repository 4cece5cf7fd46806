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


"""Provide uplift-aware feature importance and top-k feature selection."""


import logging
from typing import Dict, List

import numpy as np
import pandas as pd
from ordered_set import OrderedSet
from pydantic import Field

from ..base_model import FORMAT_VERSION, DocumentModel
from ..data import Action, Dataset
from ..exceptions import DataError
from .divergence import DEFAULT_SMOOTHING, smoothed_rate


__all__ = (
    "FeatureImportanceReport",
    "feature_importance_filter",
    "select_top_k",
    "DEFAULT_TOP_K",
)


logger = logging.getLogger(__name__)


DEFAULT_TOP_K = 50


class FeatureImportanceReport(DocumentModel):
    """
    Rank features by how much the uplift varies across their bins.

    Attributes:
        scores (dict): The non-negative importance per feature, in schema order.
        ranking (list of str): The features by descending importance, ties by name.
        bins_used (int): The largest number of bins any feature was cut into.

    """

    scores: Dict[str, float]
    ranking: List[str]
    bins_used: int = Field(..., alias="binsUsed", ge=1)


def _bin_codes(values: np.ndarray, n_bins: int) -> np.ndarray:
    """Return equal-frequency bin codes, using the values themselves when few."""
    unique, codes = np.unique(values, return_inverse=True)
    if unique.size <= n_bins:
        return codes
    return pd.qcut(values, n_bins, labels=False, duplicates="drop").astype(np.int64)


def feature_importance_filter(
    dataset: Dataset, n_bins: int = 10, smoothing: float = DEFAULT_SMOOTHING
) -> FeatureImportanceReport:
    """
    Score every design column by the variance of the uplift across its bins.

    A column is cut into `n_bins` equal-frequency bins (a column with at most
    `n_bins` distinct values, such as a one-hot category, uses its values as
    bins). The score is the bin-size-weighted squared difference between each
    bin's smoothed treated-minus-control outcome rate and the overall one.

    Args:
        dataset (Dataset): The rows to score on.
        n_bins (int): The number of bins per numeric column.
        smoothing (float): Pseudo-count added to both outcomes of each arm.

    Returns:
        FeatureImportanceReport: The scores and ranking.

    Raises:
        DataError: If only one action is present or `n_bins < 2`.

    """
    if n_bins < 2:
        raise DataError(f"At least two bins are required, got n_bins={n_bins}.")
    treated = dataset.action == Action.Contact
    if treated.all() or not treated.any():
        raise DataError("Both actions must be present to score uplift features.")
    outcome = dataset.outcome.astype(float)
    n = len(dataset)

    def _uplift(n_t, n_c, y_t, y_c):
        return smoothed_rate(y_t, n_t, smoothing) - smoothed_rate(y_c, n_c, smoothing)

    overall = _uplift(
        treated.sum(),
        (~treated).sum(),
        outcome[treated].sum(),
        outcome[~treated].sum(),
    )
    scores: Dict[str, float] = {}
    bins_used = 1
    for j, name in enumerate(dataset.feature_names):
        codes = _bin_codes(dataset.design[:, j], n_bins)
        n_codes = int(codes.max()) + 1 if n else 1
        bins_used = max(bins_used, n_codes)
        n_t = np.bincount(codes, weights=treated, minlength=n_codes)
        n_c = np.bincount(codes, weights=~treated, minlength=n_codes)
        y_t = np.bincount(codes, weights=outcome * treated, minlength=n_codes)
        y_c = np.bincount(codes, weights=outcome * ~treated, minlength=n_codes)
        share = (n_t + n_c) / n
        deviation = _uplift(n_t, n_c, y_t, y_c) - overall
        scores[name] = float(np.sum(share * deviation**2))
    ranking = sorted(scores, key=lambda feature: (-scores[feature], feature))
    logger.debug("Scored %d features.", len(ranking))
    return FeatureImportanceReport(
        format_version=FORMAT_VERSION,
        scores=scores,
        ranking=ranking,
        bins_used=bins_used,
    )


def select_top_k(report: FeatureImportanceReport, k: int = DEFAULT_TOP_K) -> OrderedSet:
    """
    Return the `k` leading features of a report in ranking order.

    Raises:
        DataError: If `k < 1`.

    """
    if k < 1:
        raise DataError(f"At least one feature must be selected, got k={k}.")
    return OrderedSet(report.ranking[:k])

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


"""Provide positivity trimming on propensity scores."""


import logging
from typing import List, Sequence, Tuple

import numpy as np
from pydantic import Field

from ..base_model import FORMAT_VERSION, DocumentModel
from ..data import Dataset
from ..exceptions import DataError


__all__ = ("TrimReport", "trim_positivity")


logger = logging.getLogger(__name__)


class TrimReport(DocumentModel):
    """
    Summarize which rows a positivity trim removed.

    Attributes:
        n_input (int): Number of rows before trimming.
        n_removed_low (int): Rows removed for a propensity below `low`.
        n_removed_high (int): Rows removed for a propensity above `high`.
        removed_fraction (float): The share of removed rows.
        low (float): The lower bound, inclusive.
        high (float): The upper bound, inclusive.
        propensity_source (str): Where the propensities came from.
        removed_ids (list of str): The ids of the removed rows, in input order.

    """

    n_input: int = Field(..., alias="nInput", ge=0)
    n_removed_low: int = Field(..., alias="nRemovedLow", ge=0)
    n_removed_high: int = Field(..., alias="nRemovedHigh", ge=0)
    removed_fraction: float = Field(..., alias="removedFraction", ge=0.0, le=1.0)
    low: float
    high: float
    propensity_source: str = Field(default="estimated", alias="propensitySource")
    removed_ids: List[str] = Field(default_factory=list, alias="removedIds")


def trim_positivity(
    dataset: Dataset,
    propensities: Sequence[float],
    low: float = 0.01,
    high: float = 0.99,
    source: str = "estimated",
) -> Tuple[Dataset, TrimReport]:
    """
    Keep the rows whose propensity lies in [low, high].

    Args:
        dataset (Dataset): The rows to trim.
        propensities (sequence of float): One contact probability per row.
        low (float): The lower bound, retained.
        high (float): The upper bound, retained.
        source (str): The provenance recorded on the retained rows, one of
            'logged', 'true' or 'estimated'.

    Returns:
        tuple: The retained rows, carrying their propensity, and the report.

    Raises:
        DataError: If `low >= high` or the propensities are not aligned with the
            rows.

    """
    if not low < high:
        raise DataError(f"The lower bound {low} must be below the upper bound {high}.")
    propensities = np.asarray(propensities, dtype=float)
    if propensities.shape != (len(dataset),):
        raise DataError(
            f"Expected {len(dataset)} propensities but got {propensities.size}."
        )
    if np.any(np.isnan(propensities)):
        raise DataError("The propensities contain missing values.")
    too_low = propensities < low
    too_high = propensities > high
    removed = too_low | too_high
    keep = np.flatnonzero(~removed)
    trimmed = dataset.take(keep).with_propensity(propensities[keep], source)
    n_input = len(dataset)
    n_removed = int(too_low.sum() + too_high.sum())
    report = TrimReport(
        format_version=FORMAT_VERSION,
        n_input=n_input,
        n_removed_low=int(too_low.sum()),
        n_removed_high=int(too_high.sum()),
        removed_fraction=n_removed / n_input if n_input else 0.0,
        low=low,
        high=high,
        propensity_source=source,
        removed_ids=[str(identifier) for identifier in dataset.ids[removed]],
    )
    if n_removed:
        logger.info(
            "Trimmed %d of %d rows outside [%g, %g].", n_removed, n_input, low, high
        )
    return trimmed, report

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


"""Analyze a randomized contact trial from its records or its counts table."""


import logging
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import pandas as pd
from pydantic import Field

from ..base_model import FORMAT_VERSION, BaseModel, DocumentModel
from ..exceptions import DataError
from .stats import (
    SRM_THRESHOLD,
    ComparisonMethod,
    proportion_ci,
    srm_test,
    two_proportion_test,
)
from .trial import CONTROL, COUNTS_COLUMNS, TREATMENT, TrialResult


__all__ = (
    "ArmSummary",
    "SubgroupRow",
    "TrialAnalysis",
    "load_counts",
    "analyze_trial",
)


logger = logging.getLogger(__name__)


RECOMMENDATIONS = ("contact", "no_contact")


class ArmSummary(BaseModel):
    """
    Summarize the items of one arm (or of one arm within a subgroup).

    Attributes:
        n (int): The number of items.
        deliveries (int): The number of delivered items.
        delivery_rate (float): The share of delivered items.
        ci_low (float): The lower Wilson bound of the delivery rate.
        ci_high (float): The upper Wilson bound of the delivery rate.
        contact_rate (float): The share of contacted items.
        compliance_rate (float): The share of items whose executed action equals
            the recommendation.

    """

    n: int = Field(..., ge=1)
    deliveries: int = Field(..., ge=0)
    delivery_rate: float = Field(..., alias="deliveryRate", ge=0.0, le=1.0)
    ci_low: float = Field(..., alias="ciLow", ge=0.0, le=1.0)
    ci_high: float = Field(..., alias="ciHigh", ge=0.0, le=1.0)
    contact_rate: float = Field(..., alias="contactRate", ge=0.0, le=1.0)
    compliance_rate: float = Field(..., alias="complianceRate", ge=0.0, le=1.0)


class SubgroupRow(BaseModel):
    """Compare the arms among items with the same recommendation."""

    recommendation: str
    control: Optional[ArmSummary] = None
    treatment: Optional[ArmSummary] = None
    absolute_effect: Optional[float] = Field(default=None, alias="absoluteEffect")
    relative_effect: Optional[float] = Field(default=None, alias="relativeEffect")
    one_sided_p: Optional[float] = Field(default=None, alias="oneSidedP")


class TrialAnalysis(DocumentModel):
    """
    Hold the statistics of a trial.

    Attributes:
        level (float): The confidence level of the rate intervals.
        method (ComparisonMethod): The one-sided test.
        srm_p (float): The sample ratio mismatch p-value.
        srm_detected (bool): Whether the p-value is below the SRM threshold.
        control (ArmSummary): The control arm.
        treatment (ArmSummary): The treatment arm.
        absolute_effect (float): The treatment minus control delivery rate.
        relative_effect (float, optional): The absolute effect relative to the
            control rate; absent when no control item was delivered.
        one_sided_p (float): The p-value that treatment delivers more.
        subgroups (list): One row per recommendation.

    """

    level: float = Field(..., gt=0.0, lt=1.0)
    method: ComparisonMethod
    srm_p: float = Field(..., alias="srmP", ge=0.0, le=1.0)
    srm_detected: bool = Field(..., alias="srmDetected")
    control: ArmSummary
    treatment: ArmSummary
    absolute_effect: float = Field(..., alias="absoluteEffect")
    relative_effect: Optional[float] = Field(default=None, alias="relativeEffect")
    one_sided_p: float = Field(..., alias="oneSidedP", ge=0.0, le=1.0)
    subgroups: List[SubgroupRow]

    def to_frame(self) -> pd.DataFrame:
        """Return the delivery rates per group and subset of items."""
        records = []
        subsets = [("all", self.control, self.treatment)] + [
            (row.recommendation, row.control, row.treatment) for row in self.subgroups
        ]
        for subset, control, treatment in subsets:
            for group, arm in ((CONTROL, control), (TREATMENT, treatment)):
                if arm is None:
                    continue
                records.append(
                    {
                        "subset": subset,
                        "group": group,
                        "n": arm.n,
                        "deliveries": arm.deliveries,
                        "delivery_rate": arm.delivery_rate,
                        "ci_low": arm.ci_low,
                        "ci_high": arm.ci_high,
                        "contact_rate": arm.contact_rate,
                        "compliance_rate": arm.compliance_rate,
                    }
                )
        return pd.DataFrame(records)


def _validate_counts(counts: pd.DataFrame, source: str) -> pd.DataFrame:
    missing = [column for column in COUNTS_COLUMNS if column not in counts.columns]
    if missing:
        raise DataError(f"The counts table {source} lacks the columns {missing}.")
    counts = counts.loc[:, list(COUNTS_COLUMNS)].copy()
    for column in ("group", "recommendation"):
        counts[column] = counts[column].astype(str).str.strip().str.lower()
    unknown = set(counts["group"]) - {CONTROL, TREATMENT}
    if unknown:
        raise DataError(
            f"Unknown groups {sorted(unknown)} in the counts table {source}."
        )
    unknown = set(counts["recommendation"]) - set(RECOMMENDATIONS)
    if unknown:
        raise DataError(
            f"Unknown recommendations {sorted(unknown)} in the counts table {source}."
        )
    if counts.duplicated(["group", "recommendation"]).any():
        raise DataError(
            f"The counts table {source} repeats a group and recommendation."
        )
    numeric = counts.loc[:, list(COUNTS_COLUMNS[2:])]
    if not all(pd.api.types.is_integer_dtype(dtype) for dtype in numeric.dtypes):
        raise DataError(f"The counts in {source} must be integers.")
    if (numeric < 0).any().any():
        raise DataError(f"The counts in {source} must not be negative.")
    for column in COUNTS_COLUMNS[3:]:
        if (counts[column] > counts["n"]).any():
            raise DataError(f"The column '{column}' exceeds 'n' in {source}.")
    return counts.reset_index(drop=True)


def load_counts(path: Union[str, Path]) -> pd.DataFrame:
    """
    Load a counts table with the columns group, recommendation, n, deliveries,
    contacts and compliant.

    Raises:
        DataError: If the file is unreadable or a count is invalid.

    """
    try:
        counts = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as error:
        raise DataError(f"Cannot read the counts table '{path}': {error}") from error
    return _validate_counts(counts, f"'{path}'")


def _summarize(totals: pd.Series, level: float) -> ArmSummary:
    n = int(totals["n"])
    deliveries = int(totals["deliveries"])
    low, high = proportion_ci(deliveries, n, level)
    return ArmSummary(
        n=n,
        deliveries=deliveries,
        delivery_rate=deliveries / n,
        ci_low=low,
        ci_high=high,
        contact_rate=int(totals["contacts"]) / n,
        compliance_rate=int(totals["compliant"]) / n,
    )


def _effects(
    control: ArmSummary, treatment: ArmSummary, method: ComparisonMethod
) -> tuple:
    absolute = treatment.delivery_rate - control.delivery_rate
    relative = absolute / control.delivery_rate if control.delivery_rate > 0 else None
    p_value = two_proportion_test(
        control.deliveries, control.n, treatment.deliveries, treatment.n, method
    )
    return absolute, relative, p_value


def analyze_trial(
    trial: Union[TrialResult, pd.DataFrame],
    level: float = 0.95,
    method: ComparisonMethod = ComparisonMethod.Pooled,
    srm_threshold: float = SRM_THRESHOLD,
    expected_ratio: float = 0.5,
) -> TrialAnalysis:
    """
    Compute the statistics of a trial.

    A trial result is first reduced to its counts table, so that analyzing the
    result and analyzing its exported counts give identical statistics.

    Args:
        trial: The simulated trial or a counts table.
        level: The confidence level of the delivery-rate intervals.
        method: The one-sided test comparing the arms.
        srm_threshold: The p-value below which a sample ratio mismatch is
            reported.
        expected_ratio: The expected share of treatment items.

    Raises:
        DataError: If an arm is empty or the counts are invalid.

    """
    if isinstance(trial, TrialResult):
        counts = _validate_counts(trial.to_counts(), "of the trial")
    else:
        counts = _validate_counts(trial, "given")
    method = ComparisonMethod(method)
    totals = counts.groupby("group")[list(COUNTS_COLUMNS[2:])].sum()
    for group in (CONTROL, TREATMENT):
        if group not in totals.index or totals.loc[group, "n"] == 0:
            raise DataError(f"The {group} group of the trial is empty.")
    control = _summarize(totals.loc[CONTROL], level)
    treatment = _summarize(totals.loc[TREATMENT], level)
    absolute, relative, p_value = _effects(control, treatment, method)
    srm_p = srm_test(control.n, treatment.n, expected_ratio)
    if srm_p < srm_threshold:
        logger.warning(
            "Sample ratio mismatch detected (p=%.3g < %g); the effect estimate may "
            "be biased.",
            srm_p,
            srm_threshold,
        )
    subgroups = []
    for recommendation in RECOMMENDATIONS:
        arms = {}
        for group in (CONTROL, TREATMENT):
            selected = (counts["group"] == group) & (
                counts["recommendation"] == recommendation
            )
            rows = counts[selected]
            if len(rows) and int(rows["n"].iloc[0]) > 0:
                arms[group] = _summarize(rows.iloc[0], level)
        row = SubgroupRow(
            recommendation=recommendation,
            control=arms.get(CONTROL),
            treatment=arms.get(TREATMENT),
        )
        if len(arms) == 2:
            sub_absolute, sub_relative, sub_p = _effects(
                arms[CONTROL], arms[TREATMENT], method
            )
            row = row.copy(
                update={
                    "absolute_effect": sub_absolute,
                    "relative_effect": sub_relative,
                    "one_sided_p": sub_p,
                }
            )
        subgroups.append(row)
    logger.info(
        "Delivery rate %.2f%% (control) vs %.2f%% (treatment), one-sided p=%.3g.",
        100 * control.delivery_rate,
        100 * treatment.delivery_rate,
        p_value,
    )
    return TrialAnalysis(
        format_version=FORMAT_VERSION,
        level=level,
        method=method,
        srm_p=float(np.clip(srm_p, 0.0, 1.0)),
        srm_detected=srm_p < srm_threshold,
        control=control,
        treatment=treatment,
        absolute_effect=absolute,
        relative_effect=relative,
        one_sided_p=float(np.clip(p_value, 0.0, 1.0)),
        subgroups=subgroups,
    )

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


"""Provide the statistical tests of a randomized contact trial."""


import logging
from enum import Enum, unique
from typing import Tuple

import numpy as np
from scipy import stats
from statsmodels.stats.proportion import proportion_confint, proportions_ztest

from ..exceptions import DataError


__all__ = (
    "ComparisonMethod",
    "SRM_THRESHOLD",
    "srm_test",
    "two_proportion_test",
    "proportion_ci",
)


logger = logging.getLogger(__name__)


SRM_THRESHOLD = 0.01


@unique
class ComparisonMethod(Enum):
    """Represent the one-sided test comparing the arms' outcome rates."""

    Pooled = "pooled"
    Welch = "welch"


def srm_test(n_control: int, n_treatment: int, expected_ratio: float = 0.5) -> float:
    """
    Return the p-value of a sample ratio mismatch check.

    A chi-squared goodness-of-fit test with one degree of freedom compares the
    observed arm sizes with the split expected from the assignment probability.

    Args:
        n_control: The number of control items.
        n_treatment: The number of treatment items.
        expected_ratio: The expected share of treatment items.

    Raises:
        DataError: If there are no items or the ratio lies outside (0, 1).

    """
    total = n_control + n_treatment
    if total <= 0 or min(n_control, n_treatment) < 0:
        raise DataError("The sample ratio check needs a positive number of items.")
    if not 0.0 < expected_ratio < 1.0:
        raise DataError(f"The expected ratio must lie in (0, 1), got {expected_ratio}.")
    observed = np.array([n_control, n_treatment], dtype=float)
    expected = np.array([1.0 - expected_ratio, expected_ratio]) * total
    statistic = float(np.sum((observed - expected) ** 2 / expected))
    return float(stats.chi2.sf(statistic, df=1))


def _check_counts(x: int, n: int) -> None:
    if n <= 0:
        raise DataError(f"An arm needs at least one item, got n={n}.")
    if not 0 <= x <= n:
        raise DataError(f"The successes must lie in [0, {n}], got {x}.")


def _binary_std(x: int, n: int) -> float:
    if n < 2:
        return 0.0
    p = x / n
    return float(np.sqrt(p * (1.0 - p) * n / (n - 1)))


def two_proportion_test(
    x1: int,
    n1: int,
    x2: int,
    n2: int,
    method: ComparisonMethod = ComparisonMethod.Pooled,
) -> float:
    """
    Return the one-sided p-value that the second rate exceeds the first.

    The pooled method is the two-proportion z-test with the pooled rate in the
    standard error; the Welch method runs Welch's t-test on the binary outcomes.
    When the outcomes carry no variance the p-value is 0.5 for equal rates.

    Args:
        x1: Successes of the first (control) arm.
        n1: Items of the first arm.
        x2: Successes of the second (treatment) arm.
        n2: Items of the second arm.
        method: The test.

    Raises:
        DataError: If an arm is empty or its successes exceed its items.

    """
    _check_counts(x1, n1)
    _check_counts(x2, n2)
    method = ComparisonMethod(method)
    pooled = (x1 + x2) / (n1 + n2)
    if method is ComparisonMethod.Pooled:
        if pooled in (0.0, 1.0):
            return 0.5
        _, p_value = proportions_ztest(
            count=np.array([x2, x1]), nobs=np.array([n2, n1]), alternative="larger"
        )
        return float(p_value)
    std1, std2 = _binary_std(x1, n1), _binary_std(x2, n2)
    if std1 == 0.0 and std2 == 0.0:
        difference = x2 / n2 - x1 / n1
        return 0.5 if difference == 0 else float(difference < 0)
    _, p_value = stats.ttest_ind_from_stats(
        mean1=x2 / n2,
        std1=std2,
        nobs1=n2,
        mean2=x1 / n1,
        std2=std1,
        nobs2=n1,
        equal_var=False,
        alternative="greater",
    )
    return float(p_value)


def proportion_ci(x: int, n: int, level: float = 0.95) -> Tuple[float, float]:
    """
    Return the Wilson score interval of a proportion.

    The bounds are exactly 0 when there are no successes and exactly 1 when every
    item succeeded.

    Raises:
        DataError: If `n` is zero, `x` lies outside [0, n] or the level outside
            (0, 1).

    """
    _check_counts(x, n)
    if not 0.0 < level < 1.0:
        raise DataError(f"The confidence level must lie in (0, 1), got {level}.")
    low, high = proportion_confint(x, n, alpha=1.0 - level, method="wilson")
    low = 0.0 if x == 0 else float(np.clip(low, 0.0, 1.0))
    high = 1.0 if x == n else float(np.clip(high, 0.0, 1.0))
    return low, high

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


"""Generate synthetic worlds with known potential outcomes."""


import logging
import string
from enum import Enum, unique
from typing import List, Tuple

import numpy as np
import pandas as pd
from pydantic import Field, root_validator, validator
from scipy.special import expit

from ..base_model import BaseModel
from .dataset import HORIZON_THREE_MONTHS, Dataset


__all__ = (
    "EffectKind",
    "EffectFunction",
    "SyntheticSpec",
    "generate_synthetic",
    "OUTCOME_CLIP",
)


logger = logging.getLogger(__name__)


OUTCOME_CLIP = (0.01, 0.99)


@unique
class EffectKind(Enum):
    """Represent the shape of the treatment effect function."""

    Constant = "constant"
    Linear = "linear"
    Segments = "segments"


class EffectFunction(BaseModel):
    """
    Describe the map from numeric features to the treatment effect.

    Attributes:
        kind (EffectKind): The shape of the function.
        value (float): The effect of a constant function.
        intercept (float): The intercept of a linear function.
        coefficients (list of float): The slopes of a linear function, one per
            numeric feature (missing trailing values count as zero).
        feature (int): The numeric feature index a two-segment step depends on.
        threshold (float): Rows with the feature above the threshold get `above`.
        above (float): The effect above the threshold.
        below (float): The effect at or below the threshold.

    """

    kind: EffectKind = EffectKind.Constant
    value: float = Field(default=0.0, ge=-1.0, le=1.0)
    intercept: float = 0.0
    coefficients: List[float] = Field(default_factory=list)
    feature: int = Field(default=0, ge=0)
    threshold: float = 0.0
    above: float = Field(default=0.15, ge=-1.0, le=1.0)
    below: float = Field(default=-0.10, ge=-1.0, le=1.0)

    def evaluate(self, numeric: np.ndarray) -> np.ndarray:
        """Return the effect for every row of a numeric feature matrix."""
        n = numeric.shape[0]
        if self.kind is EffectKind.Constant:
            return np.full(n, self.value)
        if self.kind is EffectKind.Linear:
            slopes = np.zeros(numeric.shape[1])
            slopes[: len(self.coefficients)] = self.coefficients
            return self.intercept + numeric @ slopes
        above = numeric[:, self.feature] > self.threshold
        return np.where(above, self.above, self.below)


class SyntheticSpec(BaseModel):
    """
    Describe a synthetic world.

    Numeric features are independent standard normal draws; categorical features
    are uniform over `n_categories` levels named `a`, `b`, .... Only numeric
    features enter the baseline, effect and logging functions.

    Attributes:
        n_rows (int): Number of lead-days.
        n_numeric_features (int): Number of numeric features `n_x0`, `n_x1`, ....
        n_categorical_features (int): Number of categorical features `c_c0`, ....
        n_categories (int): Number of levels per categorical feature.
        baseline_intercept (float): Intercept of the no-contact outcome logit.
        baseline_coefficients (list of float): Slopes of the no-contact outcome logit.
        effect_function (EffectFunction): The treatment effect map.
        logging_intercept (float): Intercept of the logging policy logit.
        logging_coefficients (list of float): Slopes of the logging policy logit.
        propensity_clip (tuple of float): Bounds of the logging propensity.
        outlier_fraction (float): Share of rows whose propensity is pushed outside
            the clip bounds, half below and half above.
        seed (int): The random seed.
        day_index (int): The episode day of every row.
        horizon_days (int): The outcome horizon.

    """

    n_rows: int = Field(default=20000, ge=1)
    n_numeric_features: int = Field(default=5, ge=1)
    n_categorical_features: int = Field(default=0, ge=0)
    n_categories: int = Field(default=3, ge=2, le=26)
    baseline_intercept: float = -2.0
    baseline_coefficients: List[float] = Field(default_factory=list)
    effect_function: EffectFunction = Field(default_factory=EffectFunction)
    logging_intercept: float = 0.0
    logging_coefficients: List[float] = Field(default_factory=list)
    propensity_clip: Tuple[float, float] = (0.01, 0.99)
    outlier_fraction: float = Field(default=0.0, ge=0.0, lt=0.5)
    seed: int = Field(default=0, ge=0)
    day_index: int = Field(default=1, ge=1)
    horizon_days: int = Field(default=HORIZON_THREE_MONTHS, ge=1)

    @validator("propensity_clip")
    def check_clip(cls, bounds: Tuple[float, float]) -> Tuple[float, float]:
        """Require 0 < low < high < 1."""
        low, high = bounds
        if not 0.0 < low < high < 1.0:
            raise ValueError(
                f"The bounds must satisfy 0 < low < high < 1, got {bounds}."
            )
        return bounds

    @root_validator(skip_on_failure=True)
    def check_dimensions(cls, values: dict) -> dict:
        """Require coefficient vectors and the step feature to fit the features."""
        n_numeric = values["n_numeric_features"]
        for name in ("baseline_coefficients", "logging_coefficients"):
            if len(values[name]) > n_numeric:
                raise ValueError(
                    f"{name} has {len(values[name])} entries but there are only "
                    f"{n_numeric} numeric features."
                )
        effect = values["effect_function"]
        if len(effect.coefficients) > n_numeric:
            raise ValueError("The effect function has more slopes than features.")
        if effect.kind is EffectKind.Segments and effect.feature >= n_numeric:
            raise ValueError(
                f"The effect function uses feature {effect.feature} but there are "
                f"only {n_numeric} numeric features."
            )
        return values


def _padded(coefficients: List[float], size: int) -> np.ndarray:
    result = np.zeros(size)
    result[: len(coefficients)] = coefficients
    return result


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    """
    Draw a synthetic dataset with potential outcomes and true propensities.

    For every row the no-contact probability is `p0 = clip(expit(b0 + b·x))`, the
    contact probability is `p1 = clip(p0 + tau(x))`, both clipped to
    `OUTCOME_CLIP`; `y0` and `y1` are independent Bernoulli draws, the logged
    action is drawn with the clipped logging propensity and the outcome is the
    potential outcome of that action. `true_cate` stores `p1 - p0`.

    Args:
        spec (SyntheticSpec): The world description.

    Returns:
        Dataset: The rows, with `propensity` holding the true logging propensity
            and `outlier` marking the rows pushed outside `propensity_clip`.

    """
    rng = np.random.default_rng(spec.seed)
    n, k = spec.n_rows, spec.n_numeric_features
    numeric = rng.standard_normal((n, k))
    levels = np.array(list(string.ascii_lowercase[: spec.n_categories]))
    categorical = levels[
        rng.integers(0, spec.n_categories, size=(n, spec.n_categorical_features))
    ]
    low, high = OUTCOME_CLIP
    p0 = np.clip(
        expit(
            spec.baseline_intercept
            + numeric @ _padded(spec.baseline_coefficients, k)
        ),
        low,
        high,
    )
    p1 = np.clip(p0 + spec.effect_function.evaluate(numeric), low, high)
    y0 = (rng.random(n) < p0).astype(np.int8)
    y1 = (rng.random(n) < p1).astype(np.int8)
    propensity = np.clip(
        expit(spec.logging_intercept + numeric @ _padded(spec.logging_coefficients, k)),
        *spec.propensity_clip,
    )
    n_outliers = int(round(spec.outlier_fraction * n))
    outlier = np.zeros(n, dtype=bool)
    if n_outliers:
        clip_low, clip_high = spec.propensity_clip
        outliers = rng.choice(n, size=n_outliers, replace=False)
        half = n_outliers // 2
        propensity[outliers[:half]] = clip_low / 2.0
        propensity[outliers[half:]] = 1.0 - (1.0 - clip_high) / 2.0
        outlier[outliers] = True
    action = (rng.random(n) < propensity).astype(np.int8)
    outcome = np.where(action == 1, y1, y0).astype(np.int8)

    features = pd.DataFrame(
        {f"n_x{j}": numeric[:, j] for j in range(k)}
    )
    for j in range(spec.n_categorical_features):
        features[f"c_c{j}"] = pd.array(categorical[:, j], dtype="string")
    logger.debug(
        "Generated %d rows with a mean true effect of %.4f.", n, float(np.mean(p1 - p0))
    )
    return Dataset(
        ids=np.arange(n, dtype=np.int64),
        day=np.full(n, spec.day_index, dtype=np.int64),
        action=action,
        outcome=outcome,
        features=features,
        horizon_days=spec.horizon_days,
        propensity=propensity,
        true_cate=p1 - p0,
        y0=y0,
        y1=y1,
        outlier=outlier,
        propensity_source="true",
    )

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


"""Provide an L2-regularized logistic regression fitted by Newton's method."""


import logging
from enum import Enum, unique
from typing import List, Optional, Sequence

import numpy as np
from pydantic import Field
from scipy.special import expit

from ..abstract_base import AbstractBase
from ..base_model import FORMAT_VERSION, DocumentModel
from ..data import Dataset, FeatureVector
from ..data.schema import select_columns
from ..exceptions import DataError, EstimationError
from ..helpers import stable_hash


__all__ = (
    "Target",
    "LogisticModel",
    "LogisticModelIO",
    "fit_logistic",
    "predict_proba",
    "negative_log_likelihood",
    "gradient",
    "PROBABILITY_FLOOR",
)


logger = logging.getLogger(__name__)


PROBABILITY_FLOOR = 1e-9
MAX_STEP_HALVINGS = 30


@unique
class Target(Enum):
    """Represent the dataset column a logistic model predicts."""

    Action = "action"
    Outcome = "outcome"


class LogisticModelIO(DocumentModel):
    """
    Represent a fitted logistic model on disk.

    Attributes:
        target (Target): The predicted column.
        feature_names (list of str): The design columns in model order.
        schema_hash (str): A digest of the feature names.
        means (list of float): The training means used for standardization.
        scales (list of float): The training standard deviations.
        weights (list of float): The weights of the standardized features.
        intercept (float): The intercept.
        l2_strength (float): The penalty strength.
        converged (bool): Whether Newton's method converged.
        n_iterations (int): The number of Newton iterations.

    """

    target: Target
    feature_names: List[str] = Field(default_factory=list, alias="featureNames")
    schema_hash: str = Field(..., alias="schemaHash")
    means: List[float] = Field(default_factory=list)
    scales: List[float] = Field(default_factory=list)
    weights: List[float] = Field(default_factory=list)
    intercept: float
    l2_strength: float = Field(..., alias="l2Strength", ge=0.0)
    converged: bool
    n_iterations: int = Field(..., alias="nIterations", ge=0)


class LogisticModel(AbstractBase):
    """
    Represent a fitted logistic regression.

    Features are standardized with the training means and standard deviations
    before the weights apply, so `weights` are on the standardized scale.

    """

    _repr_attributes = ("target", "feature_names", "converged")

    def __init__(
        self,
        *,
        target: Target,
        feature_names: Sequence[str],
        weights: Sequence[float],
        intercept: float,
        means: Optional[Sequence[float]] = None,
        scales: Optional[Sequence[float]] = None,
        l2_strength: float = 0.0,
        converged: bool = True,
        n_iterations: int = 0,
        **kwargs,
    ) -> None:
        """Initialize a logistic model from its parameters."""
        super().__init__(**kwargs)
        self.target = Target(target)
        self.feature_names = tuple(feature_names)
        k = len(self.feature_names)
        self.weights = np.array(weights, dtype=float)
        self.intercept = float(intercept)
        self.means = np.zeros(k) if means is None else np.array(means, dtype=float)
        self.scales = np.ones(k) if scales is None else np.array(scales, dtype=float)
        for name in ("weights", "means", "scales"):
            values = getattr(self, name)
            if values.shape != (k,):
                raise DataError(f"Expected {k} {name} but got {values.size}.")
            values.flags.writeable = False
        if not (np.all(np.isfinite(self.weights)) and np.isfinite(self.intercept)):
            raise EstimationError("The logistic model parameters are not finite.")
        self.l2_strength = float(l2_strength)
        self.converged = bool(converged)
        self.n_iterations = int(n_iterations)
        self._freeze()

    @property
    def schema_hash(self) -> str:
        """Return a digest of the model's feature names."""
        return stable_hash(list(self.feature_names))

    def predict_matrix(self, matrix: np.ndarray) -> np.ndarray:
        """Return clamped probabilities for a matrix in model feature order."""
        eta = self.intercept + ((matrix - self.means) / self.scales) @ self.weights
        return np.clip(expit(eta), PROBABILITY_FLOOR, 1.0 - PROBABILITY_FLOOR)

    def predict_dataset(self, dataset: Dataset) -> np.ndarray:
        """
        Return clamped probabilities for every row of a dataset.

        Raises:
            SchemaMismatchError: If a model feature is not part of the schema.

        """
        return self.predict_matrix(dataset.matrix(self.feature_names))

    @classmethod
    def hydrate(cls, model_io: LogisticModelIO) -> "LogisticModel":
        """Hydrate a new LogisticModel instance from its IO."""
        return cls(
            target=model_io.target,
            feature_names=model_io.feature_names,
            weights=model_io.weights,
            intercept=model_io.intercept,
            means=model_io.means,
            scales=model_io.scales,
            l2_strength=model_io.l2_strength,
            converged=model_io.converged,
            n_iterations=model_io.n_iterations,
        )

    def to_io(self) -> LogisticModelIO:
        """Return the serializable representation of this model."""
        return LogisticModelIO(
            format_version=FORMAT_VERSION,
            target=self.target,
            feature_names=list(self.feature_names),
            schema_hash=self.schema_hash,
            means=self.means.tolist(),
            scales=self.scales.tolist(),
            weights=self.weights.tolist(),
            intercept=self.intercept,
            l2_strength=self.l2_strength,
            converged=self.converged,
            n_iterations=self.n_iterations,
        )


def negative_log_likelihood(
    theta: np.ndarray, design: np.ndarray, labels: np.ndarray, l2: float
) -> float:
    """
    Return the penalized mean negative log-likelihood.

    Args:
        theta: The intercept followed by the weights.
        design: The feature matrix with a leading column of ones.
        labels: Binary labels.
        l2: The penalty strength; the penalty `l2 / 2 * |theta|^2` includes the
            intercept.

    """
    eta = design @ theta
    penalty = 0.5 * l2 * theta @ theta
    return float(np.mean(np.logaddexp(0.0, eta) - labels * eta) + penalty)


def gradient(
    theta: np.ndarray, design: np.ndarray, labels: np.ndarray, l2: float
) -> np.ndarray:
    """Return the gradient of `negative_log_likelihood` with respect to `theta`."""
    residual = expit(design @ theta) - labels
    return design.T @ residual / labels.shape[0] + l2 * theta


def _hessian(theta: np.ndarray, design: np.ndarray, l2: float) -> np.ndarray:
    p = expit(design @ theta)
    weighted = design * (p * (1.0 - p))[:, np.newaxis]
    return design.T @ weighted / design.shape[0] + l2 * np.eye(design.shape[1])


def fit_logistic(
    dataset: Dataset,
    target: Target = Target.Action,
    l2: float = 1e-4,
    max_iter: int = 100,
    tol: float = 1e-8,
    features: Optional[Sequence[str]] = None,
) -> LogisticModel:
    """
    Fit an L2-regularized logistic regression.

    Newton's method starts from zero and halves each step until the penalized
    loss decreases. The fit has converged when the largest parameter update is
    below `tol`.

    Args:
        dataset (Dataset): The training rows.
        target (Target): Predict the logged action (propensity model) or the
            outcome (predictive baseline).
        l2 (float): The penalty strength.
        max_iter (int): The maximum number of Newton iterations.
        tol (float): The convergence tolerance.
        features (sequence of str, optional): The design columns to use; all of them
            by default. An empty sequence fits an intercept-only model.

    Returns:
        LogisticModel: The fitted model.

    Raises:
        DataError: If the dataset has fewer than two rows or non-finite features.
        EstimationError: If the target has a single class and `l2` is zero.

    """
    target = Target(target)
    if l2 < 0:
        raise DataError(f"The penalty strength must be non-negative, got {l2}.")
    if len(dataset) < 2:
        raise DataError("At least two rows are required to fit a logistic model.")
    names = dataset.feature_names if features is None else tuple(features)
    matrix = select_columns(dataset.feature_names, names, dataset.design)
    if not np.all(np.isfinite(matrix)):
        raise DataError("The feature matrix contains non-finite values.")
    labels = dataset.action if target is Target.Action else dataset.outcome
    labels = labels.astype(float)
    if labels.min() == labels.max() and l2 == 0.0:
        raise EstimationError(
            f"The {target.value} column has a single class; the unpenalized intercept "
            f"diverges. Use a positive l2 strength."
        )
    means = matrix.mean(axis=0)
    scales = matrix.std(axis=0)
    scales[scales == 0.0] = 1.0
    design = np.hstack([np.ones((matrix.shape[0], 1)), (matrix - means) / scales])

    theta = np.zeros(design.shape[1])
    loss = negative_log_likelihood(theta, design, labels, l2)
    converged = False
    iteration = 0
    for iteration in range(1, max_iter + 1):
        step = np.linalg.lstsq(
            _hessian(theta, design, l2), gradient(theta, design, labels, l2), rcond=None
        )[0]
        for _ in range(MAX_STEP_HALVINGS):
            candidate = theta - step
            candidate_loss = negative_log_likelihood(candidate, design, labels, l2)
            if candidate_loss <= loss:
                break
            step = step / 2.0
        else:
            candidate, candidate_loss = theta, loss
        update = np.max(np.abs(candidate - theta)) if theta.size else 0.0
        theta, loss = candidate, candidate_loss
        if update < tol:
            converged = True
            break
    if not converged:
        logger.warning(
            "The logistic fit did not converge within %d iterations.", max_iter
        )
    if not np.all(np.isfinite(theta)):
        raise EstimationError("The logistic fit diverged to non-finite parameters.")
    logger.debug(
        "Fitted a logistic model in %d iterations (loss %.6g).", iteration, loss
    )
    return LogisticModel(
        target=target,
        feature_names=names,
        weights=theta[1:],
        intercept=theta[0],
        means=means,
        scales=scales,
        l2_strength=l2,
        converged=converged,
        n_iterations=iteration,
    )


def predict_proba(model: LogisticModel, row: FeatureVector) -> float:
    """
    Return the model probability for one row, clamped to [1e-9, 1 - 1e-9].

    Raises:
        SchemaMismatchError: If a model feature is absent from the row.

    """
    values = row.select(model.feature_names)[np.newaxis, :]
    return float(model.predict_matrix(values)[0])

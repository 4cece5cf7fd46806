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


"""Provide the threshold contact policy over CATE estimates."""


import logging
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd

from ..abstract_base import AbstractBase
from ..data import Action, Dataset, FeatureVector
from ..exceptions import DataError
from ..helpers import stable_hash
from ..uplift import UpliftEnsemble, predict_cate, predict_cate_batch


__all__ = (
    "ThresholdPolicy",
    "Recommendations",
    "ensemble_identifier",
    "recommend",
    "recommend_batch",
    "action_label",
)


logger = logging.getLogger(__name__)


def action_label(action: Union[Action, int]) -> str:
    """Return the label of an action used in exported tables."""
    return "contact" if Action(int(action)) is Action.Contact else "no_contact"


def ensemble_identifier(ensemble: UpliftEnsemble) -> str:
    """Return a stable identifier of a fitted ensemble."""
    return stable_hash(
        {
            "features": list(ensemble.feature_names),
            "params": ensemble.params.dict(),
            "seed": ensemble.seed,
            "trees": [forest.n_trees for forest in ensemble.forests],
        }
    )[:16]


class ThresholdPolicy(AbstractBase):
    """
    Contact exactly those rows whose CATE estimate reaches the threshold.

    Attributes:
        threshold (float): The CATE threshold; a CATE equal to it means contact.
        model_id (str, optional): The identifier of the ensemble it applies to.

    """

    _repr_attributes = ("threshold", "model_id")

    def __init__(
        self, *, threshold: float = 0.0, model_id: Optional[str] = None, **kwargs
    ) -> None:
        """Initialize a threshold policy."""
        super().__init__(**kwargs)
        if np.isnan(threshold):
            raise DataError("The policy threshold must not be NaN.")
        self.threshold = float(threshold)
        self.model_id = model_id
        self._freeze()

    @classmethod
    def for_ensemble(
        cls, ensemble: UpliftEnsemble, threshold: float = 0.0
    ) -> "ThresholdPolicy":
        """Return a policy bound to the given ensemble."""
        return cls(threshold=threshold, model_id=ensemble_identifier(ensemble))

    def decide(self, cate: np.ndarray) -> np.ndarray:
        """Return the action for every CATE estimate."""
        return np.where(
            np.asarray(cate) >= self.threshold, Action.Contact, Action.NoContact
        ).astype(np.int8)

    def _check(self, ensemble: UpliftEnsemble) -> None:
        if self.model_id is not None and self.model_id != ensemble_identifier(ensemble):
            logger.warning(
                "The policy was built for ensemble '%s' but is applied to '%s'.",
                self.model_id,
                ensemble_identifier(ensemble),
            )


class Recommendations(AbstractBase):
    """
    Hold the recommended action per row.

    Attributes:
        ids (numpy.ndarray): The row identifiers.
        cate (numpy.ndarray): The CATE estimates.
        actions (numpy.ndarray): The recommended actions.

    """

    _repr_attributes = ("contact_rate",)

    def __init__(
        self, *, ids: Sequence, cate: Sequence[float], actions: Sequence[int], **kwargs
    ) -> None:
        """Initialize aligned recommendations."""
        super().__init__(**kwargs)
        self.ids = np.asarray(ids)
        self.cate = np.asarray(cate, dtype=float)
        self.actions = np.asarray(actions, dtype=np.int8)
        if not self.ids.shape == self.cate.shape == self.actions.shape:
            raise DataError("The recommendation columns are not aligned.")
        self._freeze()

    def __len__(self) -> int:
        """Return the number of rows."""
        return int(self.actions.shape[0])

    @property
    def contact_rate(self) -> float:
        """Return the share of rows recommended for contact."""
        return float(np.mean(self.actions == Action.Contact)) if len(self) else 0.0

    def to_frame(self) -> pd.DataFrame:
        """Return the `id,cate,recommendation` table."""
        return pd.DataFrame(
            {
                "id": self.ids,
                "cate": self.cate,
                "recommendation": [action_label(a) for a in self.actions],
            }
        )

    def to_csv(self, path: Union[str, Path]) -> None:
        """Write the `id,cate,recommendation` table."""
        self.to_frame().to_csv(path, index=False)


def recommend(
    policy: ThresholdPolicy, ensemble: UpliftEnsemble, row: FeatureVector
) -> Action:
    """
    Return the recommended action for one row.

    Raises:
        SchemaMismatchError: If a model feature is absent from the row.

    """
    policy._check(ensemble)
    return Action(int(policy.decide(predict_cate(ensemble, row))))


def recommend_batch(
    policy: ThresholdPolicy, ensemble: UpliftEnsemble, dataset: Dataset
) -> Recommendations:
    """Return the recommended action for every row of a dataset."""
    policy._check(ensemble)
    cate = predict_cate_batch(ensemble, dataset)
    recommendations = Recommendations(
        ids=dataset.ids, cate=cate, actions=policy.decide(cate)
    )
    logger.info(
        "Recommended contact for %.1f%% of %d rows.",
        100.0 * recommendations.contact_rate,
        len(recommendations),
    )
    return recommendations

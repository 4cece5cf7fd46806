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


"""Save and load policies together with their ensemble."""


import logging
from pathlib import Path
from typing import List, Optional, Tuple, Union

from pydantic import Field

from ..base_model import FORMAT_VERSION, DocumentModel
from ..exceptions import DocumentError
from ..uplift import UpliftEnsemble, UpliftEnsembleIO
from .threshold import ThresholdPolicy, ensemble_identifier


__all__ = ("PolicyDocumentIO", "save_policy", "load_policy")


logger = logging.getLogger(__name__)


class PolicyDocumentIO(DocumentModel):
    """
    Represent a threshold policy and the ensemble it applies to.

    Attributes:
        threshold (float): The CATE threshold.
        model_id (str): The identifier of the embedded ensemble.
        episode_day (int, optional): The episode day the policy was trained for.
        training_range (list of str, optional): The first and last training row
            identifiers, which span the training period for time-ordered data.
        feature_subset (list of str): The features the ensemble uses.
        ensemble (UpliftEnsembleIO): The embedded ensemble document.

    """

    threshold: float
    model_id: str = Field(..., alias="modelId")
    episode_day: Optional[int] = Field(default=None, alias="episodeDay", ge=1)
    training_range: Optional[List[str]] = Field(
        default=None, alias="trainingRange", min_items=2, max_items=2
    )
    feature_subset: List[str] = Field(..., alias="featureSubset")
    ensemble: UpliftEnsembleIO


def save_policy(
    policy: ThresholdPolicy,
    ensemble: UpliftEnsemble,
    path: Union[str, Path],
    *,
    episode_day: Optional[int] = None,
    training_range: Optional[Tuple[str, str]] = None,
) -> None:
    """
    Write a policy document embedding its ensemble.

    The document is gzip-compressed when `path` ends with `.gz`.

    """
    document = PolicyDocumentIO(
        format_version=FORMAT_VERSION,
        threshold=policy.threshold,
        model_id=ensemble_identifier(ensemble),
        episode_day=episode_day,
        training_range=None if training_range is None else list(training_range),
        feature_subset=list(ensemble.feature_names),
        ensemble=ensemble.to_io(),
    )
    document.dump(path)
    logger.info("Saved the policy with threshold %g to '%s'.", policy.threshold, path)


def load_policy(path: Union[str, Path]) -> Tuple[ThresholdPolicy, UpliftEnsemble]:
    """
    Read a policy document.

    Returns:
        tuple: The policy and its ensemble.

    Raises:
        DocumentError: If the document is truncated, corrupted or inconsistent.
        DocumentVersionError: If the document was written by a newer release.

    """
    document = PolicyDocumentIO.load(path)
    ensemble = UpliftEnsemble.hydrate(document.ensemble)
    if ensemble_identifier(ensemble) != document.model_id:
        raise DocumentError(
            f"The policy document '{path}' does not match its embedded ensemble."
        )
    policy = ThresholdPolicy(threshold=document.threshold, model_id=document.model_id)
    return policy, ensemble

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


"""Summarize uplift and predictive model diagnostics in one document."""


import logging
import math
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from pydantic import Field

from ..base_model import FORMAT_VERSION, DocumentModel
from ..data import Dataset
from .metrics import roc_auc
from .qini import QiniCurve, QiniReference, qini_coefficient, qini_curve


__all__ = ("EvaluationReport", "evaluate_scores")


logger = logging.getLogger(__name__)


class EvaluationReport(DocumentModel):
    """
    Hold the Qini coefficients of the uplift model and of a predictive baseline.

    Coefficients are keyed by reference ranking; an undefined coefficient is
    stored as null.

    Attributes:
        n_rows (int): The number of evaluated rows.
        uplift_qini (dict): The uplift model's coefficient per reference.
        predictive_qini (dict): The predictive baseline's coefficient per reference.
        predictive_auc (float, optional): The baseline's ROC AUC on the outcomes.

    """

    n_rows: int = Field(..., alias="nRows", ge=0)
    uplift_qini: Dict[str, Optional[float]] = Field(..., alias="upliftQini")
    predictive_qini: Dict[str, Optional[float]] = Field(
        default_factory=dict, alias="predictiveQini"
    )
    predictive_auc: Optional[float] = Field(default=None, alias="predictiveAuc")


def _coefficients(curve: QiniCurve, dataset: Dataset) -> Dict[str, Optional[float]]:
    references = [QiniReference.OutcomeOptimal]
    if dataset.true_cate is not None:
        references.insert(0, QiniReference.GroundTruth)
    result = {}
    for reference in references:
        value = qini_coefficient(
            curve,
            reference,
            dataset.action,
            dataset.outcome,
            true_cate=dataset.true_cate,
            ids=dataset.ids,
        )
        result[reference.value] = None if math.isnan(value) else value
    return result


def evaluate_scores(
    dataset: Dataset,
    cate_scores: Sequence[float],
    predictive_scores: Optional[Sequence[float]] = None,
) -> Tuple[EvaluationReport, QiniCurve, Optional[QiniCurve]]:
    """
    Compare uplift scores with an optional predictive outcome score.

    The ground-truth reference is included when the dataset carries true
    effects; the outcome-optimal reference is always included.

    Returns:
        tuple: The report, the uplift Qini curve and the predictive Qini curve.

    """
    uplift_curve = qini_curve(cate_scores, dataset.action, dataset.outcome, dataset.ids)
    predictive_curve = None
    predictive_qini: Dict[str, Optional[float]] = {}
    auc = None
    if predictive_scores is not None:
        predictive_curve = qini_curve(
            predictive_scores, dataset.action, dataset.outcome, dataset.ids
        )
        predictive_qini = _coefficients(predictive_curve, dataset)
        if 0 < int(np.sum(dataset.outcome)) < len(dataset):
            auc = roc_auc(predictive_scores, dataset.outcome)
    report = EvaluationReport(
        format_version=FORMAT_VERSION,
        n_rows=len(dataset),
        uplift_qini=_coefficients(uplift_curve, dataset),
        predictive_qini=predictive_qini,
        predictive_auc=auc,
    )
    logger.info("Uplift Qini coefficients: %s.", report.uplift_qini)
    return report, uplift_curve, predictive_curve

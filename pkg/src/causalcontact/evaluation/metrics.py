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


"""Provide ranking metrics for predictive scores."""


from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from ..exceptions import DataError


__all__ = ("roc_auc",)


def roc_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """
    Return the probability that a random positive outranks a random negative.

    Tied scores count one half (the Mann-Whitney form).

    Raises:
        DataError: If only one label class is present.

    """
    scores = np.asarray(scores, dtype=float)
    positive = np.asarray(labels) == 1
    if scores.shape != positive.shape:
        raise DataError("The scores and labels are not aligned.")
    n_positive = int(positive.sum())
    n_negative = positive.size - n_positive
    if n_positive == 0 or n_negative == 0:
        raise DataError("Both label classes must be present to compute a ROC AUC.")
    rank_sum = rankdata(scores)[positive].sum()
    u_statistic = rank_sum - n_positive * (n_positive + 1) / 2.0
    return float(u_statistic / (n_positive * n_negative))

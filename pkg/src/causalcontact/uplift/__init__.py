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


"""Provide the uplift forest estimator of conditional treatment effects."""


from .divergence import Divergence, NodeStats, divergence, split_gain
from .tree import TreeParams, UpliftTree, UpliftTreeIO, fit_tree
from .forest import (
    UpliftForest,
    UpliftEnsemble,
    UpliftEnsembleIO,
    fit_forest,
    fit_ensemble,
    predict_cate,
    predict_cate_batch,
)
from .importance import FeatureImportanceReport, feature_importance_filter, select_top_k

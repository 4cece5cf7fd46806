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


"""Provide the dataset, event labeling and synthetic world generation."""


from .schema import (
    Action,
    FeatureKind,
    FeatureDescriptor,
    FeatureVector,
    infer_schema,
    encode_features,
    feature_names,
)
from .dataset import (
    HORIZON_THREE_MONTHS,
    HORIZON_TWO_WEEKS,
    ObservationRow,
    Dataset,
    load_dataset,
    save_dataset,
    slice_episode,
    split_holdout,
)
from .events import (
    Initiator,
    ActionLabel,
    CommunicationEvent,
    DECISION_HOUR,
    label_actions,
    load_events,
    label_lead_days,
)
from .synthetic import EffectKind, EffectFunction, SyntheticSpec, generate_synthetic

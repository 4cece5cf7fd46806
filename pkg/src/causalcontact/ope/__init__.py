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


"""Provide off-policy evaluation by self-normalized importance sampling."""


from .estimators import (
    OpeEstimate,
    BootstrapInterval,
    importance_weights,
    snips,
    snips_from_weights,
    bootstrap_ci,
)
from .curve import OpeCurve, ope_curve
from .report import (
    PolicyValueReport,
    DaySelection,
    policy_value_report,
    oracle_policy_value,
    compare_decision_days,
)

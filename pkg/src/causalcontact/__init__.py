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


"""Create top level imports."""


from importlib.metadata import PackageNotFoundError, version


try:
    __version__ = version("causalcontact")
except PackageNotFoundError:
    __version__ = "0+unknown"


from .helpers import show_versions
from .exceptions import (
    CausalContactError,
    ConfigurationError,
    DataError,
    SchemaMismatchError,
    DocumentError,
    DocumentVersionError,
    EstimationError,
    NoOverlapError,
)
from .data import (
    Action,
    Dataset,
    ObservationRow,
    SyntheticSpec,
    generate_synthetic,
    load_dataset,
    slice_episode,
    split_holdout,
)
from .baseline import fit_logistic, trim_positivity
from .uplift import UpliftEnsemble, fit_ensemble, predict_cate, select_top_k
from .policy import ThresholdPolicy, recommend, load_policy, save_policy
from .evaluation import qini_coefficient, calibration
from .ope import OpeEstimate, snips, bootstrap_ci, ope_curve
from .experiment import (
    TrialConfig,
    TrialAnalysis,
    simulate_trial,
    srm_test,
    two_proportion_test,
    proportion_ci,
    analyze_trial,
)

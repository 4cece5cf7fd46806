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



"""Ensure the expected behaviour of the uplift feature filter."""


import pandas as pd
import pytest

from causalcontact.data import (
    Dataset,
    EffectFunction,
    EffectKind,
    SyntheticSpec,
    generate_synthetic,
)
from causalcontact.exceptions import DataError
from causalcontact.uplift import (
    FeatureImportanceReport,
    feature_importance_filter,
    select_top_k,
)


@pytest.fixture(scope="function")
def world() -> Dataset:
    """Manufacture a world whose effect depends on x2 only."""
    return generate_synthetic(
        SyntheticSpec(
            n_rows=6000,
            n_numeric_features=4,
            n_categorical_features=1,
            effect_function=EffectFunction(kind=EffectKind.Segments, feature=2),
            seed=5,
        )
    )


def test_filter_ranks_effect_feature_first(world):
    """Expect the feature driving the effect to lead the ranking."""
    report = feature_importance_filter(world)
    assert report.ranking[0] == "x2"
    assert set(report.ranking) == set(world.feature_names)
    assert report.bins_used == 10
    assert all(score >= 0.0 for score in report.scores.values())


def test_filter_ranking_order(world):
    """Expect the ranking to sort by descending score."""
    report = feature_importance_filter(world, n_bins=5)
    scores = [report.scores[name] for name in report.ranking]
    assert scores == sorted(scores, reverse=True)


def test_filter_one_hot_columns(world):
    """Expect one-hot columns to be scored on their two values."""
    report = feature_importance_filter(world, n_bins=4)
    assert "c0=a" in report.scores


def test_select_top_k(world):
    """Expect the leading features in ranking order."""
    report = feature_importance_filter(world)
    selected = select_top_k(report, 2)
    assert list(selected) == report.ranking[:2]
    assert len(select_top_k(report, 100)) == len(world.feature_names)


def test_report_io(tmp_path, world):
    """Expect a saved report to load unchanged."""
    report = feature_importance_filter(world)
    report.dump(tmp_path / "feature_importance.json")
    assert FeatureImportanceReport.load(tmp_path / "feature_importance.json") == report


@pytest.mark.raises(exception=DataError)
def test_select_top_k_invalid(world):
    """Expect selecting no feature to be rejected."""
    select_top_k(feature_importance_filter(world), 0)


@pytest.mark.raises(exception=DataError, message="Both actions")
def test_filter_single_action():
    """Expect a dataset with one action to be rejected."""
    feature_importance_filter(
        Dataset(
            ids=[1, 2, 3],
            day=[1, 1, 1],
            action=[1, 1, 1],
            outcome=[0, 1, 0],
            features=pd.DataFrame({"n_x": [0.1, 0.2, 0.3]}),
        )
    )


@pytest.mark.raises(exception=DataError, message="two bins")
def test_filter_too_few_bins(world):
    """Expect fewer than two bins to be rejected."""
    feature_importance_filter(world, n_bins=1)

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


"""Ensure the expected behaviour of datasets and their CSV files."""


import numpy as np
import pandas as pd
import pytest

from causalcontact.data import (
    Action,
    Dataset,
    load_dataset,
    save_dataset,
    slice_episode,
    split_holdout,
)
from causalcontact.exceptions import DataError


HEADER = "id,day,action,outcome,propensity,n_age,c_state\n"


@pytest.fixture(scope="function")
def dataset() -> Dataset:
    """Manufacture a small dataset over two episode days."""
    return Dataset(
        ids=[10, 11, 12, 13, 14, 15],
        day=[1, 1, 2, 1, 2, 1],
        action=[1, 0, 1, 0, 1, 0],
        outcome=[1, 0, 0, 1, 1, 0],
        features=pd.DataFrame(
            {
                "n_age": [30.0, 41.0, np.nan, 25.0, 52.0, 38.0],
                "c_state": pd.array(
                    ["NY", "CA", "CA", "NY", "TX", "CA"], dtype="string"
                ),
            }
        ),
        propensity=[0.5, 0.4, 0.6, 0.3, 0.7, 0.5],
        true_cate=[0.1, -0.1, 0.0, 0.2, 0.05, 0.0],
        y0=[0, 0, 0, 1, 1, 0],
        y1=[1, 1, 0, 1, 1, 0],
    )


def write(tmp_path, body: str, header: str = HEADER):
    """Write a dataset CSV file and return its path."""
    path = tmp_path / "data.csv"
    path.write_text(header + body)
    return path


def test_dataset_accessors(dataset):
    """Expect rows and feature vectors at a position."""
    assert len(dataset) == 6
    assert dataset.feature_names == (
        "age",
        "age__missing",
        "state=CA",
        "state=NY",
        "state=TX",
    )
    row = dataset.row(2)
    assert row.id == 12
    assert row.action is Action.Contact
    assert row.potential_outcomes == (0, 0)
    np.testing.assert_array_equal(row.features.values, [0.0, 1.0, 1.0, 0.0, 0.0])
    assert [r.id for r in dataset.iter_rows()] == [10, 11, 12, 13, 14, 15]


def test_dataset_is_read_only(dataset):
    """Expect that neither the dataset nor its arrays can be modified."""
    with pytest.raises(ValueError):
        dataset.action[0] = 0
    with pytest.raises(AttributeError):
        dataset.horizon_days = 14


@pytest.mark.parametrize(
    "changes, message",
    [
        ({"ids": [1, 1]}, "Duplicate id"),
        ({"action": [0, 2]}, "action must be 0 or 1"),
        ({"day": [0, 1]}, "registration day is excluded"),
        ({"propensity": [0.5, 1.0]}, "propensity must lie in (0, 1)"),
        ({"y0": [0, 0]}, "given together"),
        ({"y0": [1, 0], "y1": [0, 0]}, "outcome differs"),
    ],
)
def test_dataset_invariants(changes, message):
    """Expect that invalid rows are rejected with a descriptive message."""
    arguments = {
        "ids": [1, 2],
        "day": [1, 1],
        "action": [0, 1],
        "outcome": [0, 0],
        "features": pd.DataFrame({"n_x": [0.0, 1.0]}),
    }
    arguments.update(changes)
    with pytest.raises(DataError) as error:
        Dataset(**arguments)
    assert message in str(error.value)


def test_save_load_round_trip(dataset, tmp_path):
    """Expect that a saved dataset is loaded back exactly."""
    path = tmp_path / "data.csv"
    save_dataset(dataset, path)
    loaded = load_dataset(path)
    np.testing.assert_array_equal(loaded.ids, dataset.ids)
    np.testing.assert_array_equal(loaded.design, dataset.design)
    np.testing.assert_array_equal(loaded.propensity, dataset.propensity)
    np.testing.assert_array_equal(loaded.true_cate, dataset.true_cate)
    assert loaded.has_potential_outcomes
    assert loaded.feature_names == dataset.feature_names
    save_dataset(loaded, tmp_path / "again.csv")
    assert (tmp_path / "again.csv").read_text() == path.read_text()


@pytest.mark.parametrize(
    "body, message",
    [
        ("1,1,1,1,0.5,3.0,NY\n2,1,2,0,0.5,1.0,CA\n", "Row 2 of"),
        ("1,1,1,1,0.5,3.0,NY\n2,0,1,0,0.5,1.0,CA\n", "day must be an integer"),
        ("1,1,1,1,1.5,3.0,NY\n", "propensity must lie in (0, 1)"),
        ("1,1,1,1,0.5,abc,NY\n", "n_age is not a number"),
        (
            "7,1,1,1,0.5,3.0,NY\n7,1,0,0,0.5,1.0,CA\n",
            "Duplicate id '7' in rows 1 and 2",
        ),
    ],
)
def test_load_strict(tmp_path, body, message):
    """Expect that the first invalid row aborts loading with its position."""
    with pytest.raises(DataError) as error:
        load_dataset(write(tmp_path, body))
    assert message in str(error.value)


@pytest.mark.raises(exception=DataError, message="required column(s) outcome")
def test_load_missing_column(tmp_path):
    """Expect that a required column must be present."""
    load_dataset(write(tmp_path, "1,1,1\n", header="id,day,action\n"))


def test_load_lenient(tmp_path):
    """Expect that invalid rows are dropped and counted."""
    body = "1,1,1,1,0.5,3.0,NY\n2,1,2,0,0.5,1.0,CA\n3,1,0,0,0.5,,CA\n"
    loaded = load_dataset(write(tmp_path, body), strict=False)
    assert loaded.n_rejected == 1
    np.testing.assert_array_equal(loaded.ids, [1, 3])
    assert "age__missing" in loaded.feature_names


def test_load_string_ids(tmp_path):
    """Expect that non-integer identifiers stay strings."""
    loaded = load_dataset(write(tmp_path, "a7,1,1,1,0.5,3.0,NY\n"))
    assert loaded.ids.tolist() == ["a7"]


def test_load_with_schema(dataset, tmp_path):
    """Expect that a second file conforms to an existing schema."""
    path = write(tmp_path, "1,1,1,1,0.5,3.0,WA\n")
    loaded = load_dataset(path, schema=dataset.schema)
    assert loaded.feature_names == dataset.feature_names
    np.testing.assert_array_equal(loaded.design, [[3.0, 0.0, 0.0, 0.0, 0.0]])


def test_slice_episode(dataset):
    """Expect only the rows of the requested day."""
    np.testing.assert_array_equal(slice_episode(dataset, 2).ids, [12, 14])


def test_slices_partition_dataset(dataset):
    """Expect the slices of all days to be disjoint and to cover every row."""
    slices = [slice_episode(dataset, day) for day in np.unique(dataset.day)]
    ids = np.concatenate([part.ids for part in slices])
    assert len(ids) == len(np.unique(ids)) == len(dataset)
    assert set(ids.tolist()) == set(dataset.ids.tolist())
    for part in slices:
        assert len(np.unique(part.day)) == 1


def test_outlier_marker_follows_rows(dataset):
    """Expect the outlier marker to follow the rows through slicing."""
    marked = Dataset(
        ids=dataset.ids,
        day=dataset.day,
        action=dataset.action,
        outcome=dataset.outcome,
        features=dataset.features,
        outlier=[False, True, True, False, False, False],
    )
    np.testing.assert_array_equal(slice_episode(marked, 2).outlier, [True, False])
    np.testing.assert_array_equal(marked.take([1, 0]).outlier, [True, False])
    with pytest.raises(DataError, match="outlier"):
        Dataset(
            ids=[1, 2],
            day=[1, 1],
            action=[0, 0],
            outcome=[0, 0],
            features=dataset.features.iloc[:2],
            outlier=[True],
        )


@pytest.mark.raises(exception=DataError, message="registration day")
def test_slice_registration_day(dataset):
    """Expect that the registration day cannot be sliced."""
    slice_episode(dataset, 0)


def test_split_fraction(dataset):
    """Expect a seeded partition preserving the row order."""
    train, holdout = split_holdout(dataset, holdout_fraction=0.5, seed=3)
    assert len(train) == len(holdout) == 3
    assert sorted(train.ids.tolist() + holdout.ids.tolist()) == dataset.ids.tolist()
    assert train.ids.tolist() == sorted(train.ids.tolist())
    again, _ = split_holdout(dataset, holdout_fraction=0.5, seed=3)
    np.testing.assert_array_equal(again.ids, train.ids)


def test_split_cutoff(dataset):
    """Expect that the rows from the cutoff onwards form the holdout."""
    train, holdout = split_holdout(dataset, cutoff_ordinal=4)
    np.testing.assert_array_equal(train.ids, [10, 11, 12, 13])
    np.testing.assert_array_equal(holdout.ids, [14, 15])


@pytest.mark.parametrize(
    "kwargs",
    [
        {},
        {"holdout_fraction": 0.5, "cutoff_ordinal": 2},
        {"holdout_fraction": 1.0},
        {"cutoff_ordinal": 6},
    ],
)
@pytest.mark.raises(exception=DataError)
def test_split_invalid(dataset, kwargs):
    """Expect that exactly one valid split mode is required."""
    split_holdout(dataset, **kwargs)

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



"""Ensure the expected behaviour of single uplift trees."""


import numpy as np
import pytest

from causalcontact.data import (
    Dataset,
    EffectFunction,
    EffectKind,
    SyntheticSpec,
    generate_synthetic,
)
from causalcontact.exceptions import DataError, EstimationError
from causalcontact.uplift import TreeParams, UpliftTree, fit_tree
from causalcontact.uplift.tree import LEAF


@pytest.fixture(scope="function")
def world() -> Dataset:
    """Manufacture a world whose effect changes sign at x0 = 0."""
    return generate_synthetic(
        SyntheticSpec(
            n_rows=4000,
            n_numeric_features=3,
            effect_function=EffectFunction(kind=EffectKind.Segments),
            seed=11,
        )
    )


@pytest.fixture(scope="function")
def params() -> TreeParams:
    """Manufacture shallow tree parameters using every feature."""
    return TreeParams(max_depth=3, min_leaf_per_arm=50, mtry=3)


def test_tree_finds_segment(world, params):
    """Expect the root to split on the segment feature close to its threshold."""
    tree = fit_tree(world, params, seed=0)
    assert tree.feature[0] == 0
    assert abs(tree.threshold[0]) < 0.3
    left, right = tree.left[0], tree.right[0]
    assert tree.value[left] < 0.0 < tree.value[right]


def test_tree_leaf_sizes(world, params):
    """Expect every leaf to hold enough treated and control rows."""
    tree = fit_tree(world, params, seed=0)
    leaves = tree.leaves
    assert leaves.size >= 2
    assert (tree.counts[leaves, 0] >= params.min_leaf_per_arm).all()
    assert (tree.counts[leaves, 1] >= params.min_leaf_per_arm).all()
    assert tree.depth <= params.max_depth


def test_tree_children_partition_parent(world, params):
    """Expect the counts of the children of every split to add up."""
    tree = fit_tree(world, params, seed=0)
    for node in np.flatnonzero(tree.feature != LEAF):
        np.testing.assert_array_equal(
            tree.counts[tree.left[node]] + tree.counts[tree.right[node]],
            tree.counts[node],
        )
    assert tree.counts[0].sum() - tree.counts[0, 2:].sum() == len(world)


def test_tree_predicts_leaf_values(world, params):
    """Expect predictions to be the uplift of the leaf each row reaches."""
    tree = fit_tree(world, params, seed=0)
    matrix = world.matrix()
    leaves = tree.apply(matrix)
    assert set(leaves.tolist()) <= set(tree.leaves.tolist())
    np.testing.assert_array_equal(tree.predict(matrix), tree.value[leaves])
    stats = tree.stats(int(leaves[0]))
    assert stats.uplift == pytest.approx(tree.value[leaves[0]])


def test_tree_deterministic(world):
    """Expect the same seed to grow the same tree when features are sampled."""
    params = TreeParams(max_depth=4, min_leaf_per_arm=40, mtry=1)
    first = fit_tree(world, params, seed=5)
    second = fit_tree(world, params, seed=5)
    assert first.to_io() == second.to_io()


def test_tree_io(world, params):
    """Expect a tree to survive its serializable representation."""
    tree = fit_tree(world, params, seed=0)
    copy = UpliftTree.hydrate(tree.to_io(), params.smoothing)
    matrix = world.matrix()
    np.testing.assert_array_equal(copy.predict(matrix), tree.predict(matrix))


def test_tree_stump_without_gain(world):
    """Expect a root leaf when no split keeps enough rows in both arms."""
    tree = fit_tree(world, TreeParams(min_leaf_per_arm=1500), seed=0)
    assert tree.n_nodes == 1
    assert tree.depth == 0


@pytest.mark.raises(exception=EstimationError, message="every leaf needs")
def test_tree_too_few_rows(world):
    """Expect an arm smaller than the leaf minimum to be rejected."""
    fit_tree(world.take(np.arange(100)), TreeParams(min_leaf_per_arm=80), seed=0)


@pytest.mark.raises(exception=DataError, message="Both actions")
def test_tree_single_action(world, params):
    """Expect a dataset with a single action to be rejected."""
    fit_tree(world.take(np.flatnonzero(world.action == 1)), params, seed=0)

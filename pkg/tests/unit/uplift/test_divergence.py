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



"""Ensure the expected behaviour of the split criteria."""


import numpy as np
import pytest

from causalcontact.exceptions import DataError
from causalcontact.uplift import Divergence, NodeStats, divergence, split_gain


@pytest.mark.parametrize(
    "kind, expected",
    [
        (Divergence.KL, 0.8318),
        (Divergence.Euclidean, 0.72),
        (Divergence.ChiSquared, 2.25),
    ],
)
def test_divergence_values(kind, expected):
    """Expect the known divergences of 0.8 from 0.2."""
    assert divergence(0.8, 0.2, kind) == pytest.approx(expected, abs=1e-4)


@pytest.mark.parametrize("kind", list(Divergence))
def test_divergence_identical(kind):
    """Expect a zero divergence between identical distributions."""
    assert divergence(0.3, 0.3, kind) == pytest.approx(0.0, abs=1e-15)


def test_divergence_vectorized():
    """Expect arrays to be evaluated element by element."""
    result = divergence(np.array([0.8, 0.5]), np.array([0.2, 0.5]), "euclidean")
    np.testing.assert_allclose(result, [0.72, 0.0])


def test_node_stats_smoothing():
    """Expect the smoothed rates to stay inside the open unit interval."""
    stats = NodeStats(n_t=10, n_c=10, y_t=10, y_c=0)
    assert stats.n == 20
    assert stats.p_t == pytest.approx(10.5 / 11)
    assert stats.p_c == pytest.approx(0.5 / 11)
    assert stats.uplift == pytest.approx(10 / 11)


def test_node_stats_addition():
    """Expect the union of two nodes to add up their counts."""
    total = NodeStats(n_t=3, n_c=4, y_t=1, y_c=2) + NodeStats(
        n_t=5, n_c=6, y_t=2, y_c=3
    )
    assert (total.n_t, total.n_c, total.y_t, total.y_c) == (8, 10, 3, 5)


@pytest.mark.parametrize(
    "counts",
    [
        pytest.param({"n_t": 2, "n_c": 2, "y_t": 3, "y_c": 0}, id="too-many-treated"),
        pytest.param({"n_t": 2, "n_c": 2, "y_t": 0, "y_c": -1}, id="negative"),
        pytest.param(
            {"n_t": 2, "n_c": 2, "y_t": 0, "y_c": 0, "smoothing": 0.0}, id="smoothing"
        ),
    ],
)
@pytest.mark.raises(exception=DataError)
def test_node_stats_invalid(counts):
    """Expect inconsistent counts to be rejected."""
    NodeStats(**counts)


def test_split_gain_informative():
    """Expect a split separating opposite effects to have a positive gain."""
    parent = NodeStats(n_t=20, n_c=20, y_t=10, y_c=10)
    left = NodeStats(n_t=10, n_c=10, y_t=9, y_c=1)
    right = NodeStats(n_t=10, n_c=10, y_t=1, y_c=9)
    for kind in Divergence:
        assert split_gain(parent, left, right, kind) > 0.0


def test_split_gain_uninformative():
    """Expect a split into copies of the parent to have no gain."""
    parent = NodeStats(n_t=20, n_c=20, y_t=10, y_c=10)
    half = NodeStats(n_t=10, n_c=10, y_t=5, y_c=5)
    assert split_gain(parent, half, half) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.raises(exception=DataError, message="do not add up")
def test_split_gain_mismatch():
    """Expect children that do not partition the parent to be rejected."""
    parent = NodeStats(n_t=20, n_c=20, y_t=10, y_c=10)
    child = NodeStats(n_t=10, n_c=10, y_t=5, y_c=4)
    split_gain(parent, child, child)


@pytest.mark.parametrize("kind", list(Divergence))
@pytest.mark.parametrize(
    "left, right",
    [
        pytest.param((12, 3, 7, 1), (5, 20, 1, 9), id="unbalanced"),
        pytest.param((1, 0, 1, 0), (30, 25, 4, 17), id="single-row"),
        pytest.param((8, 8, 0, 8), (8, 8, 8, 0), id="opposite"),
    ],
)
def test_split_gain_symmetric(kind, left, right):
    """Expect the gain not to depend on which child is called left."""
    fields = ("n_t", "n_c", "y_t", "y_c")
    first = NodeStats(**dict(zip(fields, left)))
    second = NodeStats(**dict(zip(fields, right)))
    parent = first + second
    assert split_gain(parent, first, second, kind) == pytest.approx(
        split_gain(parent, second, first, kind), rel=1e-12, abs=1e-15
    )

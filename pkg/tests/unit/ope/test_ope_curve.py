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



"""Ensure the expected behaviour of OPE curves over the contacted share."""


import numpy as np
import pytest

from causalcontact.data import (
    Dataset,
    EffectFunction,
    EffectKind,
    SyntheticSpec,
    generate_synthetic,
)
from causalcontact.exceptions import DataError
from causalcontact.ope import OpeCurve, ope_curve, snips


@pytest.fixture(scope="function")
def world() -> Dataset:
    """Manufacture a two-segment world with a constant propensity of one half."""
    return generate_synthetic(
        SyntheticSpec(
            n_rows=20000,
            effect_function=EffectFunction(kind=EffectKind.Segments),
            seed=23,
        )
    )


def test_curve_endpoints_exact(world):
    """Expect the endpoints to be the never- and always-contact estimates."""
    cate_curve, random_curve = ope_curve(
        world, world.true_cate, n_grid=10, n_reps=50, seed=1
    )
    never = snips(world, np.zeros(len(world), dtype=int)).value
    always = snips(world, np.ones(len(world), dtype=int)).value
    for curve in (cate_curve, random_curve):
        np.testing.assert_allclose(curve.fractions, np.arange(11) / 10)
        assert curve.values[0] == never
        assert curve.values[-1] == always
        assert all(
            e.ci_low <= e.value <= e.ci_high for e in curve.estimates if e is not None
        )
    assert cate_curve.ordering == "cate"
    assert random_curve.ordering == "random"


def test_curve_interior_maximum(world):
    """Expect contacting the positive segment only to beat both endpoints."""
    cate_curve, _ = ope_curve(world, world.true_cate, n_grid=10, n_reps=50, seed=2)
    values = cate_curve.values
    assert values[1:-1].max() > max(values[0], values[-1])
    assert 0.3 <= cate_curve.fractions[int(np.argmax(values))] <= 0.7


def test_curve_random_order_near_chord(world):
    """Expect the random ordering to stay close to the chord between endpoints."""
    _, random_curve = ope_curve(world, world.true_cate, n_grid=10, n_reps=100, seed=3)
    values = random_curve.values
    chord = values[0] + random_curve.fractions * (values[-1] - values[0])
    halfwidths = np.array([e.halfwidth for e in random_curve.estimates])
    assert np.all(np.abs(values - chord) <= 2.0 * halfwidths.max())


def test_curve_deterministic(world):
    """Expect the same seed to reproduce both curves."""
    first = ope_curve(world, world.true_cate, n_grid=5, n_reps=30, seed=9)
    second = ope_curve(world, world.true_cate, n_grid=5, n_reps=30, seed=9)
    for a, b in zip(first, second):
        assert a.to_frame().equals(b.to_frame())


def test_curve_table(world):
    """Expect one table row per fraction labelled with its ordering."""
    cate_curve, _ = ope_curve(world, world.true_cate, n_grid=4, n_reps=20)
    frame = cate_curve.to_frame()
    assert list(frame.columns) == [
        "fraction",
        "value",
        "ci_low",
        "ci_high",
        "ess",
        "ordering",
    ]
    assert len(frame) == 5
    assert set(frame["ordering"]) == {"cate"}


def test_curve_flags_unmatched_points():
    """Expect points matching no logged action to be kept as gaps."""
    world = generate_synthetic(SyntheticSpec(n_rows=400, seed=4))
    contacted = world.take(np.flatnonzero(world.action == 1))
    cate_curve, _ = ope_curve(contacted, np.zeros(len(contacted)), n_grid=2, n_reps=20)
    assert cate_curve.estimates[0] is None
    assert np.isnan(cate_curve.values[0])
    assert cate_curve.estimates[-1] is not None


@pytest.mark.parametrize(
    "fractions",
    [
        pytest.param([0.0, 0.5], id="no-end"),
        pytest.param([0.0, 0.6, 0.4, 1.0], id="decreasing"),
    ],
)
@pytest.mark.raises(exception=DataError)
def test_curve_type_invariants(fractions):
    """Expect curves without both endpoints or out of order to be rejected."""
    OpeCurve(ordering="cate", fractions=fractions, estimates=[None] * len(fractions))


@pytest.mark.parametrize(
    "n_grid, n_scores",
    [
        pytest.param(0, None, id="no-steps"),
        pytest.param(5, 10, id="misaligned"),
    ],
)
@pytest.mark.raises(exception=DataError)
def test_curve_invalid(world, n_grid, n_scores):
    """Expect invalid grids or misaligned scores to be rejected."""
    scores = world.true_cate if n_scores is None else np.zeros(n_scores)
    ope_curve(world, scores, n_grid=n_grid, n_reps=10)

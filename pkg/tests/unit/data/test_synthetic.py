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


"""Ensure the expected behaviour of the synthetic world generator."""


import numpy as np
import pytest
from pydantic import ValidationError
from scipy.special import expit

from causalcontact.data import (
    EffectFunction,
    EffectKind,
    SyntheticSpec,
    generate_synthetic,
    save_dataset,
)


def test_generate_is_seeded():
    """Expect identical worlds for identical seeds and different ones otherwise."""
    spec = SyntheticSpec(n_rows=500, seed=11)
    first, second = generate_synthetic(spec), generate_synthetic(spec)
    np.testing.assert_array_equal(first.design, second.design)
    np.testing.assert_array_equal(first.y1, second.y1)
    other = generate_synthetic(spec.copy(update={"seed": 12}))
    assert not np.array_equal(first.design, other.design)


def test_generate_columns():
    """Expect prefixed numeric and categorical columns and true propensities."""
    spec = SyntheticSpec(
        n_rows=200, n_numeric_features=2, n_categorical_features=1, n_categories=3
    )
    world = generate_synthetic(spec)
    assert list(world.features.columns) == ["n_x0", "n_x1", "c_c0"]
    assert world.feature_names == ("x0", "x1", "c0=a", "c0=b", "c0=c")
    assert world.propensity_source == "true"
    assert world.has_potential_outcomes
    np.testing.assert_array_equal(world.ids, np.arange(200))


def test_segments_effect():
    """Expect the two-segment step on the configured feature."""
    effect = EffectFunction(
        kind=EffectKind.Segments, feature=1, threshold=0.0, above=0.2, below=-0.1
    )
    numeric = np.array([[5.0, -1.0], [-5.0, 1.0], [0.0, 0.0]])
    np.testing.assert_allclose(effect.evaluate(numeric), [-0.1, 0.2, -0.1])


def test_linear_effect():
    """Expect an intercept plus slopes, missing slopes counting as zero."""
    effect = EffectFunction(kind=EffectKind.Linear, intercept=0.01, coefficients=[0.02])
    numeric = np.array([[1.0, 3.0], [-1.0, 3.0]])
    np.testing.assert_allclose(effect.evaluate(numeric), [0.03, -0.01])


def test_true_cate_matches_effect():
    """Expect the stored effect to equal the clipped difference of probabilities."""
    spec = SyntheticSpec(
        n_rows=1000,
        effect_function=EffectFunction(kind=EffectKind.Constant, value=0.05),
    )
    world = generate_synthetic(spec)
    np.testing.assert_allclose(world.true_cate, 0.05, atol=1e-12)


def test_outliers():
    """Expect the declared share of rows outside the propensity clip."""
    spec = SyntheticSpec(
        n_rows=1000, outlier_fraction=0.02, propensity_clip=(0.01, 0.99)
    )
    world = generate_synthetic(spec)
    outside = (world.propensity < 0.01) | (world.propensity > 0.99)
    assert outside.sum() == 20
    assert (world.propensity < 0.01).sum() == 10


@pytest.mark.parametrize(
    "attributes",
    [
        pytest.param(
            {"propensity_clip": (0.5, 0.2)},
            marks=pytest.mark.raises(exception=ValidationError),
        ),
        pytest.param(
            {"n_numeric_features": 2, "baseline_coefficients": [1.0, 2.0, 3.0]},
            marks=pytest.mark.raises(exception=ValidationError),
        ),
        pytest.param(
            {
                "n_numeric_features": 2,
                "effect_function": {"kind": "segments", "feature": 4},
            },
            marks=pytest.mark.raises(exception=ValidationError),
        ),
        pytest.param(
            {"outlier_fraction": 0.5},
            marks=pytest.mark.raises(exception=ValidationError),
        ),
        {"n_numeric_features": 2, "baseline_coefficients": [1.0]},
    ],
)
def test_spec_validation(attributes):
    """Expect that inconsistent world descriptions are rejected."""
    SyntheticSpec(**attributes)


@pytest.mark.parametrize("intercept", [0.0, -1.0])
def test_constant_logging_rate(intercept):
    """Expect the contact rate to match a constant logging propensity."""
    spec = SyntheticSpec(n_rows=100000, logging_intercept=intercept, seed=21)
    world = generate_synthetic(spec)
    np.testing.assert_allclose(world.propensity, expit(intercept))
    assert abs(world.action.mean() - expit(intercept)) <= 0.006


@pytest.mark.parametrize(
    "effect, low, high",
    [
        pytest.param(0.0, -0.006, 0.006, id="no-effect"),
        pytest.param(0.1, 0.09, 0.11, id="constant-effect"),
    ],
)
def test_potential_outcome_difference(effect, low, high):
    """Expect the mean potential outcome difference to match a constant effect."""
    spec = SyntheticSpec(
        n_rows=100000,
        effect_function=EffectFunction(kind=EffectKind.Constant, value=effect),
        seed=22,
    )
    world = generate_synthetic(spec)
    assert low <= world.y1.mean() - world.y0.mean() <= high


def test_outcome_is_potential_outcome_of_action():
    """Expect every logged outcome to be the potential outcome of its action."""
    spec = SyntheticSpec(n_rows=5000, logging_coefficients=[0.5], seed=23)
    world = generate_synthetic(spec)
    np.testing.assert_array_equal(
        world.outcome, np.where(world.action == 1, world.y1, world.y0)
    )


def test_seeded_world_files_are_identical(tmp_path):
    """Expect the same description and seed to write byte-identical files."""
    spec = SyntheticSpec(n_rows=500, n_categorical_features=1, seed=24)
    first, second = tmp_path / "first.csv", tmp_path / "second.csv"
    save_dataset(generate_synthetic(spec), first)
    save_dataset(generate_synthetic(spec), second)
    assert first.read_bytes() == second.read_bytes()


def test_outlier_marker():
    """Expect exactly the rows pushed outside the clip to be marked."""
    spec = SyntheticSpec(n_rows=1000, outlier_fraction=0.02, seed=25)
    world = generate_synthetic(spec)
    outside = (world.propensity < 0.01) | (world.propensity > 0.99)
    np.testing.assert_array_equal(world.outlier, outside)
    clean = generate_synthetic(spec.copy(update={"outlier_fraction": 0.0}))
    assert not clean.outlier.any()

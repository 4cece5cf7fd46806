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



"""Ensure the expected behaviour of the self-normalized estimators."""


import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

from causalcontact.data import Dataset, SyntheticSpec, generate_synthetic
from causalcontact.exceptions import DataError, EstimationError, NoOverlapError
from causalcontact.ope import (
    OpeEstimate,
    bootstrap_ci,
    importance_weights,
    snips,
    snips_from_weights,
)
from causalcontact.ope.estimators import interval_from_replicates


@pytest.fixture(scope="function")
def rows() -> Dataset:
    """Manufacture three logged rows with known propensities."""
    return Dataset(
        ids=[1, 2, 3],
        day=[1, 1, 1],
        action=[1, 0, 1],
        outcome=[1, 0, 0],
        features=pd.DataFrame({"n_x": [0.0, 1.0, 2.0]}),
        propensity=[0.5, 0.5, 0.25],
    )


def test_snips_contact_all(rows):
    """Expect the hand-evaluated value of the always-contact policy."""
    estimate = snips(rows, [1, 1, 1])
    np.testing.assert_allclose(
        importance_weights(rows.action, rows.propensity, np.ones(3)), [2.0, 0.0, 4.0]
    )
    assert estimate.value == pytest.approx(1.0 / 3.0)
    assert estimate.n_matched == 2
    assert estimate.effective_sample_size == pytest.approx(36.0 / 20.0)
    assert estimate.contact_rate == 1.0
    assert estimate.ci_low == estimate.value == estimate.ci_high


def test_snips_never_contact(rows):
    """Expect a zero value when the only matched row failed."""
    estimate = snips(rows, [0, 0, 0])
    assert estimate.value == 0.0
    assert estimate.n_matched == 1


def test_snips_logged_policy_uniform_weights():
    """Expect the plain outcome mean when replaying the logs at e = 0.5."""
    world = generate_synthetic(SyntheticSpec(n_rows=500, seed=1))
    assert snips(world, world.action).value == pytest.approx(world.outcome.mean())


@pytest.mark.parametrize("scale", [0.5, 2.0, 8.0])
def test_snips_scale_invariance(scale):
    """Expect scaled weights to leave the value unchanged."""
    rng = np.random.default_rng(0)
    weights = rng.exponential(size=100)
    outcomes = rng.integers(0, 2, 100)
    assert snips_from_weights(scale * weights, outcomes) == snips_from_weights(
        weights, outcomes
    )


def test_snips_bounded():
    """Expect every value inside the range of binary outcomes."""
    rng = np.random.default_rng(1)
    for _ in range(50):
        weights = rng.exponential(size=20) * rng.integers(0, 2, 20)
        weights[0] += 1.0
        value = snips_from_weights(weights, rng.integers(0, 2, 20))
        assert 0.0 <= value <= 1.0


@pytest.mark.raises(exception=NoOverlapError)
def test_snips_no_overlap(rows):
    """Expect a policy never matching the logs to be rejected."""
    snips(rows, [0, 1, 0])


@pytest.mark.raises(exception=DataError, message="requires propensities")
def test_snips_requires_propensities(rows):
    """Expect rows without propensities to be rejected."""
    snips(
        Dataset(
            ids=rows.ids,
            day=rows.day,
            action=rows.action,
            outcome=rows.outcome,
            features=rows.features,
        ),
        [1, 1, 1],
    )


@pytest.mark.raises(exception=DataError, message="policy actions")
def test_snips_misaligned(rows):
    """Expect misaligned policy actions to be rejected."""
    snips(rows, [1, 1])


@pytest.mark.raises(exception=ValidationError, message="does not contain")
def test_estimate_interval_invariant():
    """Expect an interval excluding the estimate to be rejected."""
    OpeEstimate(
        value=0.5, ci_low=0.6, ci_high=0.7, effective_sample_size=1.0, n_matched=1
    )


def test_bootstrap_ci_deterministic():
    """Expect the same seed to reproduce the interval around the estimate."""
    world = generate_synthetic(SyntheticSpec(n_rows=2000, seed=2))
    policy = np.ones(len(world), dtype=int)
    first = bootstrap_ci(world, policy, n_reps=200, seed=4)
    second = bootstrap_ci(world, policy, n_reps=200, seed=4)
    assert (first.low, first.high) == (second.low, second.high)
    assert first.low < snips(world, policy).value < first.high
    assert first.n_skipped == 0
    assert first.n_reps == 200


@pytest.mark.slow
def test_bootstrap_ci_width_scaling():
    """Expect the interval to shrink by about two when the rows quadruple."""
    widths = []
    for n_rows in (20000, 80000):
        world = generate_synthetic(SyntheticSpec(n_rows=n_rows, seed=5))
        interval = bootstrap_ci(world, np.ones(n_rows, dtype=int), n_reps=300, seed=6)
        widths.append(interval.high - interval.low)
    assert 1.6 <= widths[0] / widths[1] <= 2.4


@pytest.mark.slow
def test_snips_oracle_consistency():
    """Expect the estimate within two standard errors of the true value mostly."""
    hits = 0
    for seed in range(20):
        world = generate_synthetic(
            SyntheticSpec(n_rows=20000, logging_coefficients=[0.5], seed=seed)
        )
        policy = (world.matrix(["x1"])[:, 0] > 0).astype(int)
        truth = np.mean(np.where(policy == 1, world.y1, world.y0))
        interval = bootstrap_ci(world, policy, n_reps=200, seed=seed)
        hits += abs(snips(world, policy).value - truth) <= 2 * interval.standard_error
    assert hits >= 16


def test_interval_skips_degenerate_replicates(caplog):
    """Expect degenerate replicates to be skipped and counted."""
    replicates = np.array([0.1, np.nan, 0.2, 0.3, np.nan])
    interval = interval_from_replicates(replicates, 0.9)
    assert interval.n_skipped == 2
    assert 0.1 <= interval.low < interval.high <= 0.3
    assert "Skipped 2 of 5" in caplog.text


@pytest.mark.raises(exception=NoOverlapError, message="overlap is too poor")
def test_interval_too_many_degenerate():
    """Expect mostly degenerate replicates to be rejected."""
    interval_from_replicates(np.array([0.1, np.nan, np.nan]), 0.95)


@pytest.mark.parametrize("level", [0.0, 1.0])
@pytest.mark.raises(exception=EstimationError)
def test_bootstrap_ci_invalid_level(rows, level):
    """Expect levels outside the unit interval to be rejected."""
    bootstrap_ci(rows, [1, 1, 1], level=level)

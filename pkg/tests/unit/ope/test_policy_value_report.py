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



"""Ensure the expected behaviour of policy comparisons and day selection."""


import numpy as np
import pytest

from causalcontact.base_model import FORMAT_VERSION
from causalcontact.data import (
    Dataset,
    EffectFunction,
    EffectKind,
    SyntheticSpec,
    generate_synthetic,
)
from causalcontact.exceptions import DataError
from causalcontact.ope import (
    DaySelection,
    OpeEstimate,
    PolicyValueReport,
    compare_decision_days,
    oracle_policy_value,
    policy_value_report,
)


@pytest.fixture(scope="function")
def world() -> Dataset:
    """Manufacture a two-segment world logged by a feature-driven policy."""
    return generate_synthetic(
        SyntheticSpec(
            n_rows=20000,
            effect_function=EffectFunction(kind=EffectKind.Segments),
            logging_intercept=-1.0,
            logging_coefficients=[0.0, 0.5],
            seed=29,
        )
    )


def _report(
    new: float, existing: float, contact_rate: float = 0.5
) -> PolicyValueReport:
    def _estimate(value: float) -> OpeEstimate:
        return OpeEstimate(
            value=value,
            ci_low=value,
            ci_high=value,
            effective_sample_size=10.0,
            n_matched=10,
            contact_rate=contact_rate,
        )

    return PolicyValueReport(
        format_version=FORMAT_VERSION,
        n_rows=10,
        threshold=0.0,
        propensity_source="estimated",
        estimates={
            "new": _estimate(new),
            "existing": _estimate(existing),
            "always": _estimate(existing),
            "never": _estimate(existing),
        },
    )


def test_report_beats_constant_policies(world):
    """Expect the new policy to beat both constant policies on a clear effect."""
    report = policy_value_report(world, world.true_cate, n_reps=200, seed=1)
    new = report.estimates["new"]
    best_constant = max(
        report.estimates["always"],
        report.estimates["never"],
        key=lambda estimate: estimate.value,
    )
    pooled = max(new.halfwidth, best_constant.halfwidth)
    assert new.value - best_constant.value > 2.0 * pooled
    assert report.estimates["always"].contact_rate == 1.0
    assert report.estimates["never"].contact_rate == 0.0
    assert report.estimates["existing"].contact_rate == pytest.approx(
        world.action.mean()
    )
    assert report.propensity_source == "true"
    assert set(report.oracle_values) == {"new", "existing", "always", "never"}
    assert report.oracle_values["new"] > report.oracle_values["always"]


def test_report_same_policy_identical(world):
    """Expect identical estimates when the new policy replays the logs."""
    report = policy_value_report(world, world.action - 0.5, n_reps=100, seed=2)
    assert report.estimates["new"] == report.estimates["existing"]
    assert report.added_value == 0.0


def test_report_explicit_existing_actions(world):
    """Expect given existing recommendations to replace the logged actions."""
    existing = np.ones(len(world), dtype=int)
    report = policy_value_report(world, world.true_cate, existing, n_reps=50)
    assert report.estimates["existing"].value == report.estimates["always"].value


def test_report_document(tmp_path, world):
    """Expect a saved report to load unchanged."""
    report = policy_value_report(world, world.true_cate, n_reps=50, threshold=0.01)
    report.dump(tmp_path / "policy_value.json")
    loaded = PolicyValueReport.load(tmp_path / "policy_value.json")
    assert loaded == report
    assert loaded.threshold == 0.01


def test_oracle_value(world):
    """Expect the true value to mix the potential outcomes by action."""
    contact = np.ones(len(world), dtype=int)
    assert oracle_policy_value(world, contact) == pytest.approx(world.y1.mean())
    assert oracle_policy_value(world, 1 - contact) == pytest.approx(world.y0.mean())


@pytest.mark.raises(exception=DataError, message="potential outcomes")
def test_oracle_requires_potential_outcomes(world):
    """Expect observational rows to have no oracle value."""
    observed = Dataset(
        ids=world.ids,
        day=world.day,
        action=world.action,
        outcome=world.outcome,
        features=world.features,
        propensity=world.propensity,
    )
    oracle_policy_value(observed, observed.action)


def test_compare_decision_days():
    """Expect the day with the largest added value to be selected."""
    selection = compare_decision_days(
        {3: _report(0.20, 0.18), 1: _report(0.25, 0.20), 2: _report(0.28, 0.25)}
    )
    assert [item.day for item in selection.days] == [1, 2, 3]
    assert selection.best_day == 1
    assert selection.days[0].added_value == pytest.approx(0.05)
    assert isinstance(selection, DaySelection)


def test_compare_decision_days_tie_earliest():
    """Expect ties to go to the earliest day."""
    selection = compare_decision_days({2: _report(0.3, 0.2), 5: _report(0.3, 0.2)})
    assert selection.best_day == 2


@pytest.mark.raises(exception=DataError, message="At least one")
def test_compare_decision_days_empty():
    """Expect an empty comparison to be rejected."""
    compare_decision_days({})

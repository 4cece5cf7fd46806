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


"""Ensure the expected labeling of lead-days from communication events."""


from datetime import date, datetime
from itertools import permutations

import pytest

from causalcontact.data import (
    Action,
    ActionLabel,
    CommunicationEvent,
    Initiator,
    label_actions,
    label_lead_days,
    load_events,
)
from causalcontact.exceptions import DataError


DAY = date(2021, 3, 2)


def event(hour: int, initiator: str = "AE", prescheduled: bool = False, day: int = 2):
    """Manufacture an event of lead 'L1' in March 2021."""
    return CommunicationEvent(
        lead_id="L1",
        timestamp=datetime(2021, 3, day, hour, 30),
        initiator=initiator,
        channel="call",
        prescheduled=prescheduled,
    )


@pytest.mark.parametrize(
    "events, expected",
    [
        pytest.param([], ActionLabel.NoContact, id="no-events"),
        pytest.param([event(10)], ActionLabel.Contact, id="ae-call"),
        pytest.param([event(10, "System")], ActionLabel.Contact, id="system"),
        pytest.param([event(10, "Lead")], ActionLabel.Excluded, id="lead-first"),
        pytest.param(
            [event(10, prescheduled=True)], ActionLabel.Excluded, id="prescheduled"
        ),
        pytest.param(
            [event(12), event(10, "Lead")], ActionLabel.Excluded, id="first-decides"
        ),
        pytest.param([event(8)], ActionLabel.NoContact, id="before-window"),
        pytest.param([event(8, day=3)], ActionLabel.Contact, id="next-morning"),
        pytest.param([event(9, day=3)], ActionLabel.NoContact, id="window-closed"),
    ],
)
def test_label_actions(events, expected):
    """Expect the first event inside the decision window to decide the label."""
    assert label_actions(events, DAY) is expected


def test_label_to_action():
    """Expect that only defined labels map to logged actions."""
    assert ActionLabel.Contact.to_action() is Action.Contact
    assert ActionLabel.NoContact.to_action() is Action.NoContact
    with pytest.raises(DataError):
        ActionLabel.Excluded.to_action()


def test_load_events(tmp_path):
    """Expect that an event log is parsed into events."""
    path = tmp_path / "events.csv"
    path.write_text(
        "lead_id,timestamp_iso8601,initiator,channel,prescheduled\n"
        "L1,2021-03-02T10:15:00,AE,call,false\n"
        "L2,2021-03-02T11:00:00+02:00,Lead,email,true\n"
    )
    events = load_events(path)
    assert [e.lead_id for e in events] == ["L1", "L2"]
    assert events[1].initiator is Initiator.Lead
    assert events[1].prescheduled


@pytest.mark.raises(exception=DataError, message="Row 1 of")
def test_load_events_invalid(tmp_path):
    """Expect that an unknown initiator is reported with its row."""
    path = tmp_path / "events.csv"
    path.write_text(
        "lead_id,timestamp_iso8601,initiator,channel,prescheduled\n"
        "L1,2021-03-02T10:15:00,Robot,call,false\n"
    )
    load_events(path)


def test_label_lead_days():
    """Expect one label per lead and day, skipping excluded lead-days."""
    events = [event(10), event(10, "Lead", day=3)]
    labels, n_excluded = label_lead_days(events, {"L1": date(2021, 3, 1)}, n_days=3)
    assert n_excluded == 1
    assert labels.to_dict(orient="records") == [
        {"lead_id": "L1", "day": 1, "action": 1},
        {"lead_id": "L1", "day": 3, "action": 0},
    ]


@pytest.mark.parametrize(
    "events, expected",
    [
        pytest.param(
            [event(10), event(12, "Lead"), event(14, prescheduled=True), event(20)],
            ActionLabel.Contact,
            id="contact-first",
        ),
        pytest.param(
            [event(10, "Lead"), event(11), event(15), event(8, day=3)],
            ActionLabel.Excluded,
            id="lead-first",
        ),
        pytest.param(
            [event(10), event(10, "Lead"), event(11)],
            ActionLabel.Excluded,
            id="tied-first",
        ),
    ],
)
def test_label_ignores_event_order(events, expected):
    """Expect the same label for every ordering of a lead's events."""
    for ordering in permutations(events):
        assert label_actions(list(ordering), DAY) is expected


@pytest.mark.parametrize(
    "timestamps, expected",
    [
        pytest.param(
            ["2021-03-02T09:45:00Z", "2021-03-02T11:00:00+02:00"],
            ActionLabel.Excluded,
            id="offset-event-first",
        ),
        pytest.param(
            ["2021-03-02T09:45:00Z", "2021-03-02T10:30:00+02:00"],
            ActionLabel.Contact,
            id="offset-event-before-window",
        ),
        pytest.param(
            ["2021-03-03T10:30:00+02:00", "2021-03-03T08:45:00Z"],
            ActionLabel.Contact,
            id="offset-event-inside-window",
        ),
    ],
)
def test_label_mixed_offsets(tmp_path, timestamps, expected):
    """Expect timestamps with different UTC offsets to be ordered in UTC."""
    path = tmp_path / "events.csv"
    path.write_text(
        "lead_id,timestamp_iso8601,initiator,channel,prescheduled\n"
        f"L1,{timestamps[0]},AE,call,false\n"
        f"L1,{timestamps[1]},Lead,email,false\n"
    )
    events = load_events(path)
    assert label_actions(events, DAY) is expected
    assert label_actions(list(reversed(events)), DAY) is expected


def test_label_lead_days_decision_hour():
    """Expect the decision hour to move the window in which a contact counts."""
    events = [event(7)]
    registered = {"L1": date(2021, 3, 1)}
    default, _ = label_lead_days(events, registered, n_days=1)
    early, _ = label_lead_days(events, registered, n_days=1, decision_hour=7)
    assert default["action"].tolist() == [0]
    assert early["action"].tolist() == [1]


@pytest.mark.parametrize("hour", [-1, 24])
@pytest.mark.raises(exception=DataError, message="decision hour")
def test_label_invalid_decision_hour(hour):
    """Expect decision hours outside a day to be rejected."""
    label_actions([], DAY, hour)

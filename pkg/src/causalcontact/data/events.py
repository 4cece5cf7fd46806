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


"""Turn raw communication event logs into labeled lead-day decisions."""


import logging
from datetime import date, datetime, time, timedelta, timezone
from enum import Enum, unique
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import pandas as pd
from pydantic import Field, ValidationError

from ..base_model import BaseModel
from ..exceptions import DataError
from .schema import Action


__all__ = (
    "Initiator",
    "CommunicationEvent",
    "ActionLabel",
    "DECISION_HOUR",
    "label_actions",
    "load_events",
    "label_lead_days",
)


logger = logging.getLogger(__name__)


DECISION_HOUR = 9

EVENT_COLUMNS = ("lead_id", "timestamp_iso8601", "initiator", "channel", "prescheduled")


@unique
class Initiator(Enum):
    """Represent who initiated a communication."""

    AE = "AE"
    Lead = "Lead"
    System = "System"


@unique
class ActionLabel(Enum):
    """Represent the label of one lead-day derived from its events."""

    NoContact = "no_contact"
    Contact = "contact"
    Excluded = "excluded"

    def to_action(self) -> Action:
        """Return the logged action, which is undefined for excluded lead-days."""
        if self is ActionLabel.Excluded:
            raise DataError("An excluded lead-day has no logged action.")
        return Action.Contact if self is ActionLabel.Contact else Action.NoContact


class CommunicationEvent(BaseModel):
    """
    Represent one logged communication with a lead.

    Attributes:
        lead_id (str): The lead the communication belongs to.
        timestamp (datetime): When the communication happened.
        initiator (Initiator): Who initiated it.
        channel (str): The channel label, e.g. 'call' or 'email'.
        prescheduled (bool): Whether it was scheduled earlier (e.g. at the lead's
            request) rather than decided upon on the day.

    """

    lead_id: str = Field(..., description="The lead the communication belongs to.")
    timestamp: datetime = Field(..., description="When the communication happened.")
    initiator: Initiator = Field(..., description="Who initiated the communication.")
    channel: str = Field(default="", description="The channel label.")
    prescheduled: bool = Field(
        default=False, description="Whether the communication was scheduled earlier."
    )

    class Config:
        """Keep events immutable."""

        frozen = True


def label_actions(
    events: Iterable[CommunicationEvent],
    decision_day: date,
    decision_hour: int = DECISION_HOUR,
) -> ActionLabel:
    """
    Label one lead-day from the lead's communication events.

    The decision window opens at `decision_hour` on `decision_day` and lasts one
    day. Only the first event inside the window matters:

    * no event in the window means the lead was not contacted;
    * a first event initiated by the AE (or the system on the AE's behalf) that
      was not prescheduled means the lead was contacted;
    * a first event initiated by the lead or one that was prescheduled leaves the
      action undefined, and the lead-day is excluded.

    Timestamps with a UTC offset are compared in UTC; timestamps without one are
    taken to be UTC already. Events sharing the earliest timestamp count as
    undefined when any of them is, so the label does not depend on event order.

    Args:
        events: The events of a single lead, in any order.
        decision_day: The calendar day to label.
        decision_hour: The hour at which the AE shift starts.

    Returns:
        ActionLabel: The label of the lead-day.

    """
    if not 0 <= decision_hour <= 23:
        raise DataError(f"The decision hour must lie in [0, 23], got {decision_hour}.")
    start = datetime.combine(decision_day, time(hour=decision_hour))
    end = start + timedelta(days=1)
    window = [event for event in events if start <= _naive(event.timestamp) < end]
    if not window:
        return ActionLabel.NoContact
    earliest = min(_naive(event.timestamp) for event in window)
    if any(
        _undefined(event) for event in window if _naive(event.timestamp) == earliest
    ):
        return ActionLabel.Excluded
    return ActionLabel.Contact


def _undefined(event: CommunicationEvent) -> bool:
    return event.prescheduled or event.initiator is Initiator.Lead


def _naive(moment: datetime) -> datetime:
    """Return the moment as a naive UTC timestamp."""
    if moment.tzinfo is None:
        return moment
    return moment.astimezone(timezone.utc).replace(tzinfo=None)


def load_events(path: Union[str, Path]) -> List[CommunicationEvent]:
    """
    Load an event-log CSV file.

    The header must be `lead_id,timestamp_iso8601,initiator,channel,prescheduled`.

    Raises:
        DataError: If a column is missing or a row cannot be parsed; the message
            cites the 1-based data row.

    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"The event log '{path}' does not exist.")
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    missing = [column for column in EVENT_COLUMNS if column not in frame.columns]
    if missing:
        raise DataError(
            f"The event log '{path}' lacks the column(s) {', '.join(missing)}."
        )
    events = []
    for position, record in enumerate(frame.to_dict(orient="records"), start=1):
        flag = record["prescheduled"].strip().lower()
        if flag not in ("true", "false", "1", "0", ""):
            raise DataError(
                f"Row {position} of '{path}': prescheduled must be a boolean, got "
                f"{record['prescheduled']!r}."
            )
        try:
            events.append(
                CommunicationEvent(
                    lead_id=record["lead_id"],
                    timestamp=record["timestamp_iso8601"],
                    initiator=record["initiator"],
                    channel=record["channel"],
                    prescheduled=flag in ("true", "1"),
                )
            )
        except ValidationError as error:
            raise DataError(
                f"Row {position} of '{path}' is invalid: {error}"
            ) from error
    logger.info("Loaded %d events from '%s'.", len(events), path)
    return events


def label_lead_days(
    events: Sequence[CommunicationEvent],
    registration_dates: Mapping[str, date],
    n_days: int,
    decision_hour: int = DECISION_HOUR,
) -> Tuple[pd.DataFrame, int]:
    """
    Label every lead-day from day 1 to `n_days` after registration.

    The registration day itself (day 0) is never labeled.

    Args:
        events: Events of any number of leads.
        registration_dates: The registration date of each lead.
        n_days: The last day since registration to label.
        decision_hour: The hour at which the AE shift starts.

    Returns:
        tuple: A frame with the columns `lead_id,day,action` holding only the
            labeled lead-days, and the number of excluded lead-days.

    """
    if n_days < 1:
        raise DataError(f"At least one day must be labeled, got n_days={n_days}.")
    by_lead: Dict[str, List[CommunicationEvent]] = {
        lead: [] for lead in registration_dates
    }
    unknown = 0
    for event in events:
        if event.lead_id in by_lead:
            by_lead[event.lead_id].append(event)
        else:
            unknown += 1
    if unknown:
        logger.warning(
            "Ignored %d events of leads without a registration date.", unknown
        )
    records = []
    n_excluded = 0
    for lead, registered in registration_dates.items():
        for day in range(1, n_days + 1):
            label = label_actions(
                by_lead[lead], registered + timedelta(days=day), decision_hour
            )
            if label is ActionLabel.Excluded:
                n_excluded += 1
                continue
            records.append(
                {"lead_id": lead, "day": day, "action": int(label.to_action())}
            )
    if n_excluded:
        logger.info("Excluded %d lead-days with an undefined action.", n_excluded)
    frame = pd.DataFrame(records, columns=["lead_id", "day", "action"])
    return frame, n_excluded

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


"""Provide the dataset of logged lead-day decisions."""


import logging
import re
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..abstract_base import AbstractBase
from ..exceptions import DataError
from .schema import (
    CATEGORICAL_PREFIX,
    NUMERIC_PREFIX,
    Action,
    FeatureDescriptor,
    FeatureVector,
    encode_features,
    feature_names,
    infer_schema,
    select_columns,
)


__all__ = (
    "HORIZON_THREE_MONTHS",
    "HORIZON_TWO_WEEKS",
    "ObservationRow",
    "Dataset",
    "load_dataset",
    "save_dataset",
    "slice_episode",
    "split_holdout",
)


logger = logging.getLogger(__name__)


HORIZON_THREE_MONTHS = 90
HORIZON_TWO_WEEKS = 14

REQUIRED_COLUMNS = ("id", "day", "action", "outcome")
OPTIONAL_COLUMNS = ("propensity", "true_cate", "y0", "y1")
_INTEGER_ID = re.compile(r"^-?[1-9][0-9]*$|^0$")


class ObservationRow(AbstractBase):
    """
    Represent one lead-day decision.

    Attributes:
        id: The unique record identifier.
        day_index (int): Days since registration, at least 1.
        features (FeatureVector): The design-encoded features.
        action (Action): The logged action.
        outcome (int): Whether the item was delivered within the horizon.
        propensity (float, optional): The probability of being contacted.
        true_cate (float, optional): The generator's treatment effect.
        potential_outcomes (tuple, optional): The pair (y0, y1).

    """

    _repr_attributes = ("id", "day_index", "action", "outcome")

    def __init__(
        self,
        *,
        id: Union[int, str],
        day_index: int,
        features: FeatureVector,
        action: Action,
        outcome: int,
        propensity: Optional[float] = None,
        true_cate: Optional[float] = None,
        potential_outcomes: Optional[Tuple[int, int]] = None,
        **kwargs,
    ) -> None:
        """Initialize an observation row."""
        super().__init__(**kwargs)
        self.id = id
        self.day_index = day_index
        self.features = features
        self.action = Action(action)
        self.outcome = outcome
        self.propensity = propensity
        self.true_cate = true_cate
        self.potential_outcomes = potential_outcomes
        self._freeze()


def _readonly(array: Optional[np.ndarray], dtype=None) -> Optional[np.ndarray]:
    if array is None:
        return None
    result = np.array(array, dtype=dtype)
    result.flags.writeable = False
    return result


class Dataset(AbstractBase):
    """
    Represent an immutable collection of lead-day decisions.

    All rows share one ordered design schema. The raw feature columns are kept
    next to the encoded design matrix so that saving and loading reproduces the
    original file.

    Attributes:
        schema (tuple of FeatureDescriptor): The ordered design schema.
        ids (numpy.ndarray): Unique record identifiers.
        day (numpy.ndarray): Days since registration per row.
        action (numpy.ndarray): Logged actions (1 = contact, 0 = no contact).
        outcome (numpy.ndarray): Binary outcomes within the horizon.
        propensity (numpy.ndarray, optional): Contact probabilities.
        true_cate (numpy.ndarray, optional): Generator treatment effects.
        y0 (numpy.ndarray, optional): Potential outcomes without contact.
        y1 (numpy.ndarray, optional): Potential outcomes with contact.
        outlier (numpy.ndarray, optional): Rows whose generator propensity was
            pushed outside the clip range. Kept in memory only; not written to CSV.
        features (pandas.DataFrame): The raw prefixed feature columns.
        design (numpy.ndarray): The encoded design matrix.
        horizon_days (int): The outcome horizon in days.
        propensity_source (str, optional): Where the propensities came from, one of
            'logged', 'true' or 'estimated'.
        n_rejected (int): Number of input rows rejected while loading.

    """

    _repr_attributes = ("n_rows", "horizon_days")

    def __init__(
        self,
        *,
        ids: Sequence,
        day: Sequence[int],
        action: Sequence[int],
        outcome: Sequence[int],
        features: pd.DataFrame,
        horizon_days: int = HORIZON_THREE_MONTHS,
        propensity: Optional[Sequence[float]] = None,
        true_cate: Optional[Sequence[float]] = None,
        y0: Optional[Sequence[int]] = None,
        y1: Optional[Sequence[int]] = None,
        outlier: Optional[Sequence[bool]] = None,
        schema: Optional[Sequence[FeatureDescriptor]] = None,
        design: Optional[np.ndarray] = None,
        propensity_source: Optional[str] = None,
        n_rejected: int = 0,
        **kwargs,
    ) -> None:
        """
        Initialize and validate a dataset.

        Args:
            schema: An existing design schema to conform to; inferred from the raw
                features when omitted.
            design: A design matrix already encoded against `schema`.

        Raises:
            DataError: If any row violates the dataset invariants.

        """
        super().__init__(**kwargs)
        self.features = features.reset_index(drop=True)
        self.schema = tuple(infer_schema(self.features) if schema is None else schema)
        if design is None:
            design = encode_features(self.features, self.schema)
        ids = np.asarray(ids)
        self.ids = _readonly(ids, dtype=np.int64 if ids.dtype.kind in "iu" else object)
        self.day = _readonly(day, dtype=np.int64)
        self.action = _readonly(action, dtype=np.int8)
        self.outcome = _readonly(outcome, dtype=np.int8)
        self.propensity = _readonly(propensity, dtype=float)
        self.true_cate = _readonly(true_cate, dtype=float)
        self.y0 = _readonly(y0, dtype=np.int8)
        self.y1 = _readonly(y1, dtype=np.int8)
        self.outlier = _readonly(outlier, dtype=bool)
        self.design = _readonly(design, dtype=float)
        self.horizon_days = int(horizon_days)
        self.propensity_source = propensity_source
        if self.propensity is not None and propensity_source is None:
            self.propensity_source = "logged"
        self.n_rejected = int(n_rejected)
        self._validate()
        self._freeze()

    def _validate(self) -> None:
        n = self.ids.shape[0]
        for name in (
            "day",
            "action",
            "outcome",
            "propensity",
            "true_cate",
            "y0",
            "y1",
            "outlier",
        ):
            values = getattr(self, name)
            if values is not None and values.shape != (n,):
                raise DataError(f"Column '{name}' has {values.shape[0]} rows, not {n}.")
        if self.design.shape != (n, len(self.schema)) or len(self.features) != n:
            raise DataError("The feature columns are not aligned with the rows.")
        unique, counts = np.unique(self.ids, return_counts=True)
        if np.any(counts > 1):
            raise DataError(f"Duplicate id {unique[np.argmax(counts > 1)]!r}.")
        self._check_rows(np.isin(self.action, (0, 1)), "action must be 0 or 1")
        self._check_rows(np.isin(self.outcome, (0, 1)), "outcome must be 0 or 1")
        self._check_rows(
            self.day >= 1, "day must be at least 1 (the registration day is excluded)"
        )
        if self.propensity is not None:
            self._check_rows(
                (self.propensity > 0.0) & (self.propensity < 1.0),
                "propensity must lie in (0, 1)",
            )
        if self.true_cate is not None:
            self._check_rows(np.abs(self.true_cate) <= 1.0, "true_cate outside [-1, 1]")
        if (self.y0 is None) != (self.y1 is None):
            raise DataError("Potential outcomes y0 and y1 must be given together.")
        if self.y0 is not None:
            factual = np.where(self.action == Action.Contact, self.y1, self.y0)
            self._check_rows(
                factual == self.outcome, "outcome differs from the potential outcome"
            )
        if not np.all(np.isfinite(self.design)):
            raise DataError("Numeric feature values must be finite.")

    def _check_rows(self, valid: np.ndarray, message: str) -> None:
        if not np.all(valid):
            position = int(np.argmin(valid))
            raise DataError(f"Row with id {self.ids[position]!r}: {message}.")

    def __len__(self) -> int:
        """Return the number of rows."""
        return int(self.ids.shape[0])

    @property
    def n_rows(self) -> int:
        """Return the number of rows."""
        return len(self)

    @property
    def feature_names(self) -> Tuple[str, ...]:
        """Return the ordered design column names."""
        return feature_names(self.schema)

    @property
    def has_potential_outcomes(self) -> bool:
        """Return whether the rows carry both potential outcomes."""
        return self.y0 is not None

    def matrix(self, names: Optional[Sequence[str]] = None) -> np.ndarray:
        """
        Return the design matrix, optionally restricted to named columns.

        Raises:
            SchemaMismatchError: If a requested column is not part of the schema.

        """
        if names is None:
            return self.design
        return select_columns(self.feature_names, names, self.design)

    def feature_vector(self, index: int) -> FeatureVector:
        """Return the encoded features of the row at a position."""
        return FeatureVector(names=self.feature_names, values=self.design[index])

    def row(self, index: int) -> ObservationRow:
        """Return the row at a position as an `ObservationRow`."""
        return ObservationRow(
            id=self.ids[index].item()
            if self.ids.dtype.kind == "i"
            else self.ids[index],
            day_index=int(self.day[index]),
            features=self.feature_vector(index),
            action=Action(int(self.action[index])),
            outcome=int(self.outcome[index]),
            propensity=None
            if self.propensity is None
            else float(self.propensity[index]),
            true_cate=None if self.true_cate is None else float(self.true_cate[index]),
            potential_outcomes=None
            if self.y0 is None
            else (int(self.y0[index]), int(self.y1[index])),
        )

    def iter_rows(self) -> Iterator[ObservationRow]:
        """Iterate over all rows in storage order."""
        return (self.row(i) for i in range(len(self)))

    def take(self, indices: Union[Sequence[int], np.ndarray]) -> "Dataset":
        """Return a new dataset with the rows at the given positions and order."""
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(
            ids=self.ids[indices],
            day=self.day[indices],
            action=self.action[indices],
            outcome=self.outcome[indices],
            features=self.features.iloc[indices],
            horizon_days=self.horizon_days,
            propensity=None if self.propensity is None else self.propensity[indices],
            true_cate=None if self.true_cate is None else self.true_cate[indices],
            y0=None if self.y0 is None else self.y0[indices],
            y1=None if self.y1 is None else self.y1[indices],
            outlier=None if self.outlier is None else self.outlier[indices],
            schema=self.schema,
            design=self.design[indices],
            propensity_source=self.propensity_source,
        )

    def with_propensity(self, propensity: Sequence[float], source: str) -> "Dataset":
        """Return a copy of the dataset carrying the given propensities."""
        return Dataset(
            ids=self.ids,
            day=self.day,
            action=self.action,
            outcome=self.outcome,
            features=self.features,
            horizon_days=self.horizon_days,
            propensity=propensity,
            true_cate=self.true_cate,
            y0=self.y0,
            y1=self.y1,
            outlier=self.outlier,
            schema=self.schema,
            design=self.design,
            propensity_source=source,
            n_rejected=self.n_rejected,
        )

    def to_frame(self) -> pd.DataFrame:
        """Return the rows in the layout of the dataset CSV file."""
        n = len(self)
        blank = np.full(n, np.nan)
        columns: Dict[str, object] = {
            "id": self.ids,
            "day": self.day,
            "action": self.action,
            "outcome": self.outcome,
            "propensity": blank if self.propensity is None else self.propensity,
            "true_cate": blank if self.true_cate is None else self.true_cate,
            "y0": blank if self.y0 is None else self.y0,
            "y1": blank if self.y1 is None else self.y1,
        }
        frame = pd.DataFrame(columns)
        return pd.concat([frame, self.features.reset_index(drop=True)], axis=1)


def save_dataset(dataset: Dataset, path: Union[str, Path]) -> None:
    """Write a dataset to a CSV file that `load_dataset` reads back identically."""
    dataset.to_frame().to_csv(path, index=False)
    logger.debug("Saved %d rows to '%s'.", len(dataset), path)


def _parse_ids(values: pd.Series) -> np.ndarray:
    text = values.astype(str)
    if len(text) and text.str.match(_INTEGER_ID).all():
        return text.astype(np.int64).to_numpy()
    return text.to_numpy(dtype=object)


def _binary(values: pd.Series) -> pd.Series:
    numbers = pd.to_numeric(values, errors="coerce")
    return numbers.where(numbers.isin((0, 1)))


def load_dataset(
    path: Union[str, Path],
    horizon_days: int = HORIZON_THREE_MONTHS,
    *,
    strict: bool = True,
    schema: Optional[Sequence[FeatureDescriptor]] = None,
) -> Dataset:
    """
    Load and validate a dataset CSV file.

    The header must contain `id,day,action,outcome`; the optional columns
    `propensity,true_cate,y0,y1` may be absent or empty, but an optional column
    that is filled for some rows must be filled for all. Feature columns carry the
    `n_` (numeric) or `c_` (categorical) prefix.

    Args:
        path: The CSV file.
        horizon_days: The outcome horizon of the file.
        strict: Raise on the first invalid row when `True`; otherwise drop invalid
            rows and record their number in `Dataset.n_rejected`.
        schema: An existing design schema to conform to, e.g. the training schema
            when loading a holdout file.

    Returns:
        Dataset: The validated rows.

    Raises:
        DataError: If a required column is missing, a row is invalid (in strict
            mode) or an id is duplicated.

    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"The dataset file '{path}' does not exist.")
    header = list(pd.read_csv(path, nrows=0).columns)
    missing = [column for column in REQUIRED_COLUMNS if column not in header]
    if missing:
        raise DataError(
            f"The dataset '{path}' lacks the required column(s) {', '.join(missing)}."
        )
    known = REQUIRED_COLUMNS + OPTIONAL_COLUMNS
    feature_columns = [column for column in header if column not in known]
    for column in feature_columns:
        if not column.startswith((NUMERIC_PREFIX, CATEGORICAL_PREFIX)):
            raise DataError(
                f"Column '{column}' is neither a reserved column nor a prefixed "
                f"feature column."
            )
    dtypes = {c: "string" for c in feature_columns if c.startswith(CATEGORICAL_PREFIX)}
    dtypes["id"] = "string"
    frame = pd.read_csv(path, dtype=dtypes, float_precision="round_trip")

    problems: List[Tuple[pd.Series, str]] = []
    problems.append((frame["id"].isna(), "id is missing"))
    day = pd.to_numeric(frame["day"], errors="coerce")
    problems.append(
        (~(day >= 1) | (day % 1 != 0), "day must be an integer of at least 1")
    )
    action = _binary(frame["action"])
    problems.append((action.isna(), "action must be 0 or 1"))
    outcome = _binary(frame["outcome"])
    problems.append((outcome.isna(), "outcome must be 0 or 1"))
    optional: Dict[str, Optional[pd.Series]] = {}
    for column in OPTIONAL_COLUMNS:
        if column not in frame.columns or frame[column].isna().all():
            optional[column] = None
            continue
        values = pd.to_numeric(frame[column], errors="coerce")
        problems.append((values.isna(), f"{column} is empty or not a number"))
        if column == "propensity":
            problems.append(
                (~((values > 0) & (values < 1)), "propensity must lie in (0, 1)")
            )
        elif column == "true_cate":
            problems.append((~(values.abs() <= 1), "true_cate must lie in [-1, 1]"))
        else:
            problems.append(
                (values.notna() & ~values.isin((0, 1)), f"{column} must be 0 or 1")
            )
        optional[column] = values
    if (optional["y0"] is None) != (optional["y1"] is None):
        raise DataError("Potential outcomes y0 and y1 must be given together.")
    if optional["y0"] is not None:
        factual = optional["y1"].where(action == 1, optional["y0"])
        problems.append(
            (
                factual != outcome,
                "outcome must equal the potential outcome of the action",
            )
        )
    features = frame[feature_columns].copy()
    for column in feature_columns:
        if column.startswith(NUMERIC_PREFIX):
            raw = features[column]
            numbers = pd.to_numeric(raw, errors="coerce")
            problems.append(
                (
                    raw.notna() & ~np.isfinite(numbers.fillna(0.0)),
                    f"{column} is not finite",
                )
            )
            problems.append(
                (raw.notna() & numbers.isna(), f"{column} is not a number")
            )
            features[column] = numbers.astype(float)

    invalid = pd.Series(False, index=frame.index)
    for mask, _ in problems:
        invalid |= mask.fillna(True).astype(bool)
    if strict and invalid.any():
        position = int(np.argmax(invalid.to_numpy()))
        reasons = [message for mask, message in problems if bool(mask.iloc[position])]
        raise DataError(
            f"Row {position + 1} of '{path}' is invalid: {'; '.join(reasons)}."
        )
    duplicated = frame["id"].duplicated(keep="first") & ~invalid
    if strict and duplicated.any():
        position = int(np.argmax(duplicated.to_numpy()))
        first = int(np.argmax((frame["id"] == frame["id"].iloc[position]).to_numpy()))
        raise DataError(
            f"Duplicate id {frame['id'].iloc[position]!r} in rows {first + 1} and "
            f"{position + 1} of '{path}'."
        )
    keep = ~(invalid | duplicated)
    n_rejected = int((~keep).sum())
    if n_rejected:
        logger.warning("Rejected %d of %d rows of '%s'.", n_rejected, len(frame), path)
    keep_np = keep.to_numpy()

    def _kept(values: Optional[pd.Series], dtype) -> Optional[np.ndarray]:
        return None if values is None else values[keep].to_numpy(dtype=dtype)

    dataset = Dataset(
        ids=_parse_ids(frame["id"][keep]),
        day=day[keep].to_numpy(dtype=np.int64),
        action=action[keep].to_numpy(dtype=np.int8),
        outcome=outcome[keep].to_numpy(dtype=np.int8),
        features=features[keep_np],
        horizon_days=horizon_days,
        propensity=_kept(optional["propensity"], float),
        true_cate=_kept(optional["true_cate"], float),
        y0=_kept(optional["y0"], np.int8),
        y1=_kept(optional["y1"], np.int8),
        schema=schema,
        n_rejected=n_rejected,
    )
    logger.info("Loaded %d rows from '%s'.", len(dataset), path)
    return dataset


def slice_episode(dataset: Dataset, day: int) -> Dataset:
    """
    Return the decisions of one episode day.

    Each day since registration is treated as its own episode with its own
    decision model.

    Raises:
        DataError: For day 0, the registration day, which is excluded from analysis.

    """
    if day < 1:
        raise DataError(
            f"Episode day {day} is not allowed: the registration day (day 0) is "
            f"excluded and days count from 1."
        )
    return dataset.take(np.flatnonzero(dataset.day == day))


def split_holdout(
    dataset: Dataset,
    holdout_fraction: Optional[float] = None,
    cutoff_ordinal: Optional[int] = None,
    seed: int = 0,
) -> Tuple[Dataset, Dataset]:
    """
    Partition a dataset into a training and a holdout part.

    Exactly one mode must be chosen. In fraction mode the holdout is a seeded
    random subset of `round(holdout_fraction * n)` rows. In ordinal mode the
    storage order is the time order and the rows from position `cutoff_ordinal`
    onwards form the holdout. Both parts keep the original row order.

    Returns:
        tuple: The training and the holdout dataset.

    Raises:
        DataError: If the dataset is empty, no or both modes are chosen, the
            fraction lies outside (0, 1) or the cutoff outside [1, n - 1].

    """
    n = len(dataset)
    if n == 0:
        raise DataError("Cannot split an empty dataset.")
    if (holdout_fraction is None) == (cutoff_ordinal is None):
        raise DataError("Choose exactly one of holdout_fraction and cutoff_ordinal.")
    if holdout_fraction is not None:
        if not 0.0 < holdout_fraction < 1.0:
            raise DataError(
                f"The holdout fraction must lie in (0, 1), got {holdout_fraction}."
            )
        permutation = np.random.default_rng(seed).permutation(n)
        n_holdout = int(round(holdout_fraction * n))
        is_holdout = np.zeros(n, dtype=bool)
        is_holdout[permutation[:n_holdout]] = True
    else:
        if not 1 <= cutoff_ordinal <= n - 1:
            raise DataError(
                f"The cutoff ordinal must lie in [1, {n - 1}], got {cutoff_ordinal}."
            )
        is_holdout = np.arange(n) >= cutoff_ordinal
    return (
        dataset.take(np.flatnonzero(~is_holdout)),
        dataset.take(np.flatnonzero(is_holdout)),
    )

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


"""Provide the feature schema shared by every row of a dataset."""


import logging
from enum import Enum, IntEnum, unique
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import Field

from ..abstract_base import AbstractBase
from ..base_model import BaseModel
from ..exceptions import DataError, SchemaMismatchError


__all__ = (
    "Action",
    "FeatureKind",
    "FeatureDescriptor",
    "FeatureVector",
    "NUMERIC_PREFIX",
    "CATEGORICAL_PREFIX",
    "MISSING_SUFFIX",
    "NUMERIC_MISSING_SENTINEL",
    "infer_schema",
    "encode_features",
    "feature_names",
    "select_columns",
)


logger = logging.getLogger(__name__)


NUMERIC_PREFIX = "n_"
CATEGORICAL_PREFIX = "c_"
MISSING_SUFFIX = "__missing"
NUMERIC_MISSING_SENTINEL = 0.0


@unique
class Action(IntEnum):
    """Represent the logged or recommended decision for one lead-day."""

    NoContact = 0
    Contact = 1


@unique
class FeatureKind(Enum):
    """Represent how a design column was derived from the raw columns."""

    Numeric = "numeric"
    Category = "category"
    Indicator = "indicator"


class FeatureDescriptor(BaseModel):
    """
    Describe one column of the design matrix.

    Attributes:
        name (str): The design column name, e.g. `age`, `state=CA` or
            `age__missing`.
        kind (FeatureKind): How the column is derived.
        source (str): The raw CSV column, e.g. `n_age` or `c_state`.
        category (str, optional): The category level of a one-hot column.

    """

    name: str = Field(..., description="The design column name.")
    kind: FeatureKind = Field(..., description="How the column is derived.")
    source: str = Field(..., description="The raw CSV column it derives from.")
    category: Optional[str] = Field(
        default=None, description="The category level of a one-hot column."
    )

    class Config:
        """Keep descriptors hashable so schemas can be compared cheaply."""

        frozen = True


def feature_names(schema: Sequence[FeatureDescriptor]) -> Tuple[str, ...]:
    """Return the ordered design column names of a schema."""
    return tuple(descriptor.name for descriptor in schema)


def _base_name(source: str) -> str:
    return source[2:]


def infer_schema(features: pd.DataFrame) -> Tuple[FeatureDescriptor, ...]:
    """
    Derive the design schema from raw feature columns.

    Numeric columns (`n_` prefix) map to one design column each, plus a companion
    missing-value indicator when any value is missing. Categorical columns (`c_`
    prefix) are expanded into one indicator per observed level in sorted order,
    plus a missing-value indicator when any value is missing.

    Args:
        features (pandas.DataFrame): Raw feature columns with their prefixes.

    Returns:
        tuple: The ordered feature descriptors.

    Raises:
        DataError: If a column has neither the numeric nor the categorical prefix.

    """
    schema: List[FeatureDescriptor] = []
    for column in features.columns:
        name = _base_name(column)
        values = features[column]
        if column.startswith(NUMERIC_PREFIX):
            schema.append(
                FeatureDescriptor(name=name, kind=FeatureKind.Numeric, source=column)
            )
        elif column.startswith(CATEGORICAL_PREFIX):
            levels = sorted(str(level) for level in values.dropna().unique())
            schema.extend(
                FeatureDescriptor(
                    name=f"{name}={level}",
                    kind=FeatureKind.Category,
                    source=column,
                    category=level,
                )
                for level in levels
            )
        else:
            raise DataError(
                f"Feature column '{column}' must start with '{NUMERIC_PREFIX}' or "
                f"'{CATEGORICAL_PREFIX}'."
            )
        if values.isna().any():
            schema.append(
                FeatureDescriptor(
                    name=f"{name}{MISSING_SUFFIX}",
                    kind=FeatureKind.Indicator,
                    source=column,
                )
            )
    return tuple(schema)


def encode_features(
    features: pd.DataFrame, schema: Sequence[FeatureDescriptor]
) -> np.ndarray:
    """
    Encode raw feature columns into the design matrix of a given schema.

    Missing numeric values are replaced by `NUMERIC_MISSING_SENTINEL` and flagged
    in the companion indicator column. Category levels unknown to the schema encode
    as all zeros.

    Raises:
        SchemaMismatchError: If a raw column required by the schema is absent.

    """
    missing = sorted({d.source for d in schema} - set(features.columns))
    if missing:
        raise SchemaMismatchError(
            f"The raw feature columns {', '.join(missing)} required by the schema "
            f"are absent."
        )
    matrix = np.empty((len(features), len(schema)), dtype=float)
    for j, descriptor in enumerate(schema):
        values = features[descriptor.source]
        if descriptor.kind is FeatureKind.Numeric:
            column = values.to_numpy(dtype=float, na_value=np.nan)
            matrix[:, j] = np.where(
                np.isnan(column), NUMERIC_MISSING_SENTINEL, column
            )
        elif descriptor.kind is FeatureKind.Category:
            matrix[:, j] = (values.astype("string") == descriptor.category).fillna(
                False
            ).to_numpy(dtype=float)
        else:
            matrix[:, j] = values.isna().to_numpy(dtype=float)
    for source in {d.source for d in schema if d.kind is FeatureKind.Category}:
        known = {d.category for d in schema if d.source == source}
        unknown = set(features[source].dropna().astype(str)) - known
        if unknown:
            logger.warning(
                "Column '%s' contains %d category level(s) unknown to the schema; "
                "they encode as all zeros.",
                source,
                len(unknown),
            )
    return matrix


class FeatureVector(AbstractBase):
    """
    Represent the design-encoded features of a single lead-day.

    Attributes:
        names (tuple of str): The design column names.
        values (numpy.ndarray): The encoded values in schema order.

    """

    _repr_attributes = ("names",)

    def __init__(self, *, names: Iterable[str], values: Iterable[float], **kwargs):
        """Initialize a feature vector from aligned names and values."""
        super().__init__(**kwargs)
        self.names = tuple(names)
        self.values = np.array(values, dtype=float)
        if self.values.shape != (len(self.names),):
            raise DataError(
                f"Expected {len(self.names)} feature values but got "
                f"{self.values.size}."
            )
        if not np.all(np.isfinite(self.values)):
            raise DataError("Feature values must be finite.")
        self.values.flags.writeable = False
        self._freeze()

    @classmethod
    def from_mapping(
        cls,
        schema: Sequence[FeatureDescriptor],
        numeric_values: Mapping[str, Optional[float]],
        categorical_values: Mapping[str, Optional[str]] = None,
    ) -> "FeatureVector":
        """
        Encode raw numeric and categorical values keyed by feature name.

        Args:
            schema: The design schema to encode against.
            numeric_values: Raw numeric values keyed by name without prefix; `None`
                marks a missing value.
            categorical_values: Raw category labels keyed by name without prefix.

        """
        categorical_values = {} if categorical_values is None else categorical_values
        row: Dict[str, object] = {}
        for descriptor in schema:
            name = _base_name(descriptor.source)
            if descriptor.source.startswith(NUMERIC_PREFIX):
                value = numeric_values.get(name)
                row[descriptor.source] = np.nan if value is None else float(value)
            else:
                row[descriptor.source] = categorical_values.get(name)
        frame = pd.DataFrame([row])
        values = encode_features(frame, schema)[0]
        return cls(names=feature_names(schema), values=values)

    def select(self, names: Sequence[str]) -> np.ndarray:
        """
        Return the values of the given design columns in the given order.

        Raises:
            SchemaMismatchError: If any requested column is absent.

        """
        return select_columns(self.names, names, self.values[np.newaxis, :])[0]


def select_columns(
    available: Sequence[str], requested: Sequence[str], matrix: np.ndarray
) -> np.ndarray:
    """Pick the `requested` columns out of a matrix whose columns are `available`."""
    index = {name: j for j, name in enumerate(available)}
    absent = [name for name in requested if name not in index]
    if absent:
        raise SchemaMismatchError(
            f"The feature(s) {', '.join(absent)} expected by the model are not part "
            f"of the schema."
        )
    return matrix[:, [index[name] for name in requested]]

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


"""Define the package's exception hierarchy."""


__all__ = (
    "CausalContactError",
    "ConfigurationError",
    "DataError",
    "SchemaMismatchError",
    "DocumentError",
    "DocumentVersionError",
    "EstimationError",
    "NoOverlapError",
)


class CausalContactError(Exception):
    """
    Define the root of all errors raised by this package.

    Attributes:
        exit_code (int): The process exit code used by the command line interface.

    """

    exit_code = 1


class ConfigurationError(CausalContactError):
    """Thrown when a configuration file or command line override is invalid."""

    exit_code = 1


class DataError(CausalContactError, ValueError):
    """Thrown when input data violate the documented schema or contracts."""

    exit_code = 2


class SchemaMismatchError(DataError):
    """Thrown when features do not match the schema a model was trained on."""

    pass


class DocumentError(DataError):
    """Thrown when a serialized document is corrupted or truncated."""

    pass


class DocumentVersionError(DocumentError):
    """Thrown when a document was written with an unsupported format version."""

    pass


class EstimationError(CausalContactError, ArithmeticError):
    """Thrown when an estimate is numerically undefined or degenerate."""

    exit_code = 3


class NoOverlapError(EstimationError):
    """Thrown when a policy never agrees with the logged actions."""

    pass

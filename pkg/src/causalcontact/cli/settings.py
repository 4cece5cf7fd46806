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


"""Provide the runtime settings of the command line interface."""


import logging
from pathlib import Path

from pydantic import BaseSettings, Field, validator


__all__ = ("CausalContactSettings",)


logger = logging.getLogger(__name__)


class CausalContactSettings(BaseSettings):
    """
    Define the runtime settings.

    Attributes:
        threads (int): The maximum number of parallel workers.
        log_level (str): The logging level name.
        output_root (pathlib.Path): The directory against which relative output
            directories are resolved.

    """

    threads: int = Field(
        default=1,
        ge=1,
        env="CAUSALCONTACT_THREADS",
        description="The maximum number of parallel workers.",
    )
    log_level: str = Field(
        default="WARNING",
        env="CAUSALCONTACT_LOG_LEVEL",
        description="The logging level name, e.g. 'INFO'.",
    )
    output_root: Path = Field(
        default=Path.cwd(),
        env="CAUSALCONTACT_OUTPUT_ROOT",
        description="The directory against which relative output directories are "
        "resolved.",
    )

    @validator("log_level")
    def check_log_level(cls, value: str) -> str:
        """Ensure that the level is known to the logging module."""
        value = value.upper()
        if not isinstance(logging.getLevelName(value), int):
            raise ValueError(f"unknown logging level '{value}'")
        return value

    class Config:
        """Configure the causalcontact settings."""

        case_sensitive = True
        env_prefix = "CAUSALCONTACT_"
        env_file = ".env"

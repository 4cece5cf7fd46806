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


"""Provide the run manifest and the output directory of a run."""


import logging
import os
import shutil
import time
from contextlib import contextmanager, suppress
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Union

from pydantic import Field

from .. import __version__
from ..base_model import FORMAT_VERSION, BaseModel, DocumentModel
from ..exceptions import DataError, DocumentError
from ..helpers import file_sha256
from .config import PipelineConfig, config_hash, write_effective_config


__all__ = ("StepRecord", "RunManifest", "Workspace", "MANIFEST_NAME")


logger = logging.getLogger(__name__)


MANIFEST_NAME = "manifest.json"
FAILED_DIRECTORY = "failed"
STAGING_DIRECTORY = ".staging"


class StepRecord(BaseModel):
    """
    Record the outputs of one completed step.

    Attributes:
        name (str): The step name.
        outputs (dict): The SHA-256 digest per written file.
        seconds (float): The wall-clock duration.
        finished (datetime): When the step completed.

    """

    name: str
    outputs: Dict[str, str]
    seconds: float = Field(..., ge=0.0)
    finished: datetime


class RunManifest(DocumentModel):
    """
    Describe how the artifacts of an output directory were produced.

    Attributes:
        tool_version (str): The causalcontact release.
        config_hash (str): The digest of the effective configuration.
        seed (int): The master seed.
        inputs (dict): The SHA-256 digest per input file.
        steps (list of StepRecord): The completed steps in order of completion.

    """

    tool_version: str = Field(..., alias="toolVersion")
    config_hash: str = Field(..., alias="configHash")
    seed: int
    inputs: Dict[str, str] = Field(default_factory=dict)
    steps: List[StepRecord] = Field(default_factory=list)

    def record(self, step: StepRecord) -> None:
        """Add a step, replacing an earlier record of the same name."""
        self.steps = [item for item in self.steps if item.name != step.name] + [step]

    def write(self, directory: Path) -> Path:
        """Write the manifest atomically into a directory."""
        path = Path(directory) / MANIFEST_NAME
        partial = path.with_name(f".{MANIFEST_NAME}.partial")
        partial.write_text(self.json(indent=2), encoding="utf-8")
        os.replace(partial, path)
        return path


class Workspace:
    """
    Manage the output directory of a run.

    Each step writes into a staging directory; on success its files are moved
    into the output directory and recorded in the manifest, on failure they are
    quarantined under `failed/<step>-<timestamp>`.

    Attributes:
        directory (pathlib.Path): The output directory.
        config (PipelineConfig): The effective configuration.
        n_jobs (int): The worker cap for parallel steps.
        manifest (RunManifest): The manifest of the directory.
        cache (dict): Objects shared between steps of one process.

    """

    def __init__(
        self, directory: Union[str, Path], config: PipelineConfig, n_jobs: int = 1
    ) -> None:
        """Open or create an output directory for a configuration."""
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.config = config
        self.n_jobs = n_jobs
        self.cache: Dict[str, Any] = {}
        self._staging: Optional[Path] = None
        self.manifest = self._open_manifest()

    def __repr__(self) -> str:
        """Return a string representation of the workspace."""
        return f"{type(self).__name__}(directory='{self.directory}')"

    def _open_manifest(self) -> RunManifest:
        digest = config_hash(self.config)
        path = self.directory / MANIFEST_NAME
        if path.is_file():
            try:
                manifest = RunManifest.load(path)
            except DocumentError:
                logger.warning("Replacing the unreadable manifest '%s'.", path)
            else:
                if manifest.config_hash == digest:
                    return manifest
                logger.info(
                    "The configuration changed; starting a new manifest in '%s'.",
                    self.directory,
                )
        return RunManifest(
            format_version=FORMAT_VERSION,
            tool_version=__version__,
            config_hash=digest,
            seed=self.config.seed,
        )

    def path(self, name: str) -> Path:
        """Return the staging path for an output file of the running step."""
        if self._staging is None:
            raise RuntimeError("Outputs can only be written while a step is running.")
        return self._staging / name

    def input(self, name: str, producer: str) -> Path:
        """
        Return the path of an artifact written by an earlier step.

        Raises:
            DataError: If the artifact does not exist.

        """
        path = self.directory / name
        if not path.is_file():
            raise DataError(
                f"The artifact '{name}' is missing from '{self.directory}'; run the "
                f"'{producer}' step first."
            )
        return path

    def register_input(self, path: Union[str, Path]) -> Path:
        """Record the digest of an external input file."""
        path = Path(path)
        if not path.is_file():
            raise DataError(f"The input file '{path}' does not exist.")
        self.manifest.inputs[str(path)] = file_sha256(path)
        return path

    def has(self, name: str) -> bool:
        """Return whether an artifact exists."""
        return (self.directory / name).is_file()

    @contextmanager
    def step(self, name: str) -> Iterator[None]:
        """Run a step with staged outputs."""
        staging = self.directory / STAGING_DIRECTORY / name
        if staging.exists():
            shutil.rmtree(staging)
        staging.mkdir(parents=True)
        self._staging = staging
        start = time.perf_counter()
        logger.info("Running the '%s' step.", name)
        try:
            yield
        except BaseException:
            stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S%fZ")
            target = self.directory / FAILED_DIRECTORY / f"{name}-{stamp}"
            target.parent.mkdir(exist_ok=True)
            shutil.move(str(staging), str(target))
            logger.error(
                "The '%s' step failed; partial outputs are in '%s'.", name, target
            )
            raise
        finally:
            self._staging = None
        outputs = {}
        for staged in sorted(staging.iterdir()):
            final = self.directory / staged.name
            os.replace(staged, final)
            outputs[staged.name] = file_sha256(final)
        staging.rmdir()
        with suppress(OSError):
            staging.parent.rmdir()
        self.manifest.record(
            StepRecord(
                name=name,
                outputs=outputs,
                seconds=time.perf_counter() - start,
                finished=datetime.now(timezone.utc),
            )
        )
        write_effective_config(self.config, self.directory)
        self.manifest.write(self.directory)
        logger.info("Finished the '%s' step with %d outputs.", name, len(outputs))

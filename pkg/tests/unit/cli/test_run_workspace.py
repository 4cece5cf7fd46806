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



"""Ensure the expected behaviour of the run output directory."""


import json
from pathlib import Path

import pytest

from causalcontact.cli.config import PipelineConfig, load_config
from causalcontact.cli.workspace import MANIFEST_NAME, RunManifest, Workspace
from causalcontact.exceptions import DataError


@pytest.fixture(scope="function")
def workspace(tmp_path: Path) -> Workspace:
    """Manufacture an empty workspace with the default configuration."""
    return Workspace(tmp_path / "run", PipelineConfig())


def test_step_moves_outputs(workspace: Workspace):
    """Expect staged outputs to be moved and recorded on success."""
    with workspace.step("demo"):
        workspace.path("a.txt").write_text("a")
        assert not workspace.has("a.txt")
    assert workspace.has("a.txt")
    manifest = RunManifest.load(workspace.directory / MANIFEST_NAME)
    assert [step.name for step in manifest.steps] == ["demo"]
    assert set(manifest.steps[0].outputs) == {"a.txt"}
    assert len(manifest.steps[0].outputs["a.txt"]) == 64
    assert (workspace.directory / "effective_config.yaml").is_file()
    assert not (workspace.directory / ".staging").exists()


def test_failed_step_is_quarantined(workspace: Workspace):
    """Expect partial outputs of a failed step to be quarantined."""
    with pytest.raises(ValueError):
        with workspace.step("broken"):
            workspace.path("partial.txt").write_text("p")
            raise ValueError("boom")
    assert not workspace.has("partial.txt")
    (failed,) = (workspace.directory / "failed").iterdir()
    assert failed.name.startswith("broken-")
    assert (failed / "partial.txt").read_text() == "p"
    assert not (workspace.directory / MANIFEST_NAME).exists()


def test_rerun_replaces_record(workspace: Workspace):
    """Expect a repeated step to replace its earlier record."""
    for content in ("1", "2"):
        with workspace.step("demo"):
            workspace.path("a.txt").write_text(content)
    with workspace.step("other"):
        pass
    assert [step.name for step in workspace.manifest.steps] == ["demo", "other"]
    assert (workspace.directory / "a.txt").read_text() == "2"


def test_manifest_survives_reopening(tmp_path: Path):
    """Expect a reopened workspace to continue an equal configuration's manifest."""
    config = PipelineConfig()
    first = Workspace(tmp_path, config)
    with first.step("demo"):
        first.path("a.txt").write_text("a")
    assert [step.name for step in Workspace(tmp_path, config).manifest.steps] == [
        "demo"
    ]
    changed = load_config(overrides=["seed=5"])
    assert Workspace(tmp_path, changed).manifest.steps == []


def test_unreadable_manifest_is_replaced(tmp_path: Path):
    """Expect a corrupted manifest to be replaced with a warning."""
    (tmp_path / MANIFEST_NAME).write_text("{")
    workspace = Workspace(tmp_path, PipelineConfig())
    assert workspace.manifest.steps == []


def test_inputs(workspace: Workspace, tmp_path: Path):
    """Expect external inputs to be recorded with their digest."""
    source = tmp_path / "input.csv"
    source.write_text("x\n1\n")
    workspace.register_input(source)
    with workspace.step("demo"):
        pass
    manifest = json.loads((workspace.directory / MANIFEST_NAME).read_text())
    assert list(manifest["inputs"]) == [str(source)]
    assert manifest["seed"] == 0


@pytest.mark.raises(exception=DataError, message="run the 'ingest' step first")
def test_missing_artifact(workspace: Workspace):
    """Expect a missing artifact to name its producer."""
    workspace.input("train.csv", "ingest")


@pytest.mark.raises(exception=DataError, message="does not exist")
def test_missing_input(workspace: Workspace, tmp_path: Path):
    """Expect a missing external input to be reported."""
    workspace.register_input(tmp_path / "absent.csv")


@pytest.mark.raises(exception=RuntimeError, message="while a step is running")
def test_path_outside_step(workspace: Workspace):
    """Expect output paths to be refused outside of a step."""
    workspace.path("a.txt")

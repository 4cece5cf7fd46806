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



"""Ensure that the complete pipeline runs end to end on a small synthetic world."""


import json
from pathlib import Path
from typing import Sequence

import pandas as pd
import pytest

from causalcontact.cli.config import PipelineConfig, load_config
from causalcontact.cli.main import run_command
from causalcontact.policy import load_policy


pytestmark = pytest.mark.slow


SMALL = (
    "synthetic.n_rows=4000",
    "synthetic.effect_function.kind=segments",
    "synthetic.effect_function.threshold=-0.2533",
    "features.top_k=null",
    "forest.max_depth=4",
    "forest.min_leaf_per_arm=10",
    "forest.n_trees=4",
    "forest.n_forests=2",
    "evaluation.n_bins=5",
    "ope.n_grid=5",
    "ope.n_reps=20",
)


def small_config(*overrides: str) -> PipelineConfig:
    """Return a fast configuration with the given extra overrides."""
    return load_config(overrides=SMALL + overrides)


def run(config: PipelineConfig, root: Path, threads: int = 1, **kwargs) -> Path:
    """Run the pipeline and return its output directory."""
    return run_command("pipeline", config, root, threads, **kwargs)


def names(directory: Path) -> Sequence[str]:
    """Return the sorted file names of a directory."""
    return sorted(path.name for path in directory.iterdir() if path.is_file())


def test_pipeline_artifacts(tmp_path: Path):
    """Expect every step to write its artifacts and to be recorded."""
    directory = run(small_config(), tmp_path)
    assert directory == tmp_path / "runs" / "default"
    expected = {
        "world.csv",
        "train.csv",
        "holdout.csv",
        "selected_features.csv",
        "propensities.csv",
        "train_trimmed.csv",
        "holdout_trimmed.csv",
        "ensemble.json.gz",
        "evaluation.json",
        "calibration.csv",
        "policy_value.json",
        "ope_curve.csv",
        "policy.json.gz",
        "recommendations.csv",
        "surrogate.txt",
        "trial_counts.csv",
        "trial_analysis.json",
        "manifest.json",
        "effective_config.yaml",
    }
    assert expected <= set(names(directory))
    manifest = json.loads((directory / "manifest.json").read_text())
    assert [step["name"] for step in manifest["steps"]] == [
        "synth",
        "ingest",
        "select-features",
        "fit-propensity",
        "trim",
        "train",
        "evaluate",
        "ope",
        "policy-export",
        "distill",
        "trial-simulate",
        "trial-analyze",
    ]
    policy, ensemble = load_policy(directory / "policy.json.gz")
    assert policy.threshold == 0.0
    assert ensemble.n_forests == 2
    recommendations = pd.read_csv(directory / "recommendations.csv")
    assert list(recommendations.columns) == ["id", "cate", "recommendation"]
    assert len(recommendations) == len(pd.read_csv(directory / "holdout.csv"))
    assert (directory / "surrogate.txt").read_text().startswith("if ")


def test_thread_count_does_not_change_results(tmp_path: Path):
    """Expect identical models and decisions for one and two workers."""
    config = small_config()
    single = run(config, tmp_path / "single")
    double = run(config, tmp_path / "double", threads=2)
    for name in (
        "ensemble.json.gz",
        "policy.json.gz",
        "recommendations.csv",
        "policy_value.json",
        "ope_curve.csv",
    ):
        assert (single / name).read_bytes() == (double / name).read_bytes(), name


def test_rerun_reproduces(tmp_path: Path):
    """Expect a rerun of the same configuration to reproduce every output."""
    config = small_config()
    directory = run(config, tmp_path)
    first = (directory / "policy.json.gz").read_bytes()
    run(config, tmp_path)
    assert (directory / "policy.json.gz").read_bytes() == first


def test_repeat_days(tmp_path: Path):
    """Expect one model per day and a day selection."""
    directory = run(small_config("ope.n_grid=2"), tmp_path, repeat_days=2)
    assert (directory / "day-1" / "policy.json.gz").is_file()
    assert (directory / "day-2" / "policy.json.gz").is_file()
    selection = json.loads((directory / "day_selection.json").read_text())
    assert [day["day"] for day in selection["days"]] == [1, 2]
    assert selection["bestDay"] in (1, 2)
    policy, _ = load_policy(directory / "day-2" / "policy.json.gz")
    assert policy.model_id


def test_file_source(tmp_path: Path):
    """Expect a dataset file to run the pipeline without the synthesis step."""
    synthetic = run_command("synth", small_config(), tmp_path)
    config = small_config(
        "data.source=file",
        f"data.path={synthetic / 'world.csv'}",
        "output.directory=from_file",
        "propensity.source=logged",
    )
    directory = run(config, tmp_path)
    files = set(names(directory))
    assert "world.csv" not in files
    assert "policy.json.gz" in files
    manifest = json.loads((directory / "manifest.json").read_text())
    steps = [step["name"] for step in manifest["steps"]]
    assert steps[0] == "ingest"
    assert "synth" not in steps
    assert str(synthetic / "world.csv") in manifest["inputs"]

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


"""Provide the pipeline configuration read from a single YAML document."""


import json
import logging
from enum import Enum, unique
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Union

import yaml
from pydantic import Field, ValidationError, root_validator, validator

from ..base_model import BaseModel
from ..data import DECISION_HOUR, HORIZON_THREE_MONTHS, SyntheticSpec
from ..exceptions import ConfigurationError
from ..experiment import SRM_THRESHOLD, ComparisonMethod, TrialConfig
from ..helpers import stable_hash
from ..uplift import Divergence, TreeParams
from ..uplift.divergence import DEFAULT_SMOOTHING


__all__ = (
    "DataSource",
    "PropensitySource",
    "PipelineConfig",
    "EFFECTIVE_CONFIG_NAME",
    "load_config",
    "apply_overrides",
    "effective_config",
    "config_hash",
    "write_effective_config",
)


logger = logging.getLogger(__name__)


EFFECTIVE_CONFIG_NAME = "effective_config.yaml"


@unique
class DataSource(Enum):
    """Represent where the logged rows come from."""

    Synthetic = "synthetic"
    File = "file"


@unique
class PropensitySource(Enum):
    """Represent where the propensities used for trimming and OPE come from."""

    Estimated = "estimated"
    Logged = "logged"
    Generator = "true"


class OutputSection(BaseModel):
    """Configure where artifacts are written."""

    directory: Path = Path("runs/default")
    compress: bool = True


class DataSection(BaseModel):
    """
    Configure the logged rows.

    Attributes:
        source (DataSource): Generate a synthetic world or read `path`.
        path (pathlib.Path, optional): The dataset CSV file.
        holdout_path (pathlib.Path, optional): A separate holdout CSV file, used
            instead of splitting.
        events_path (pathlib.Path, optional): A communication event log to label.
        registrations_path (pathlib.Path, optional): A CSV file with the columns
            `lead_id,registration_date` required by `events_path`.
        n_days (int): The number of decision days labeled per lead.
        decision_hour (int): The hour at which the daily decision window opens.
        horizon_days (int): The outcome horizon.
        strict (bool): Whether an invalid row aborts loading.

    """

    source: DataSource = DataSource.Synthetic
    path: Optional[Path] = None
    holdout_path: Optional[Path] = None
    events_path: Optional[Path] = None
    registrations_path: Optional[Path] = None
    n_days: int = Field(default=7, ge=1)
    decision_hour: int = Field(default=DECISION_HOUR, ge=0, le=23)
    horizon_days: int = Field(default=HORIZON_THREE_MONTHS, ge=1)
    strict: bool = True

    @root_validator(skip_on_failure=True)
    def check_paths(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        """Ensure that file sources name their files."""
        if values["source"] is DataSource.File and values["path"] is None:
            raise ValueError("a 'file' source requires 'path'")
        if (values["events_path"] is None) != (values["registrations_path"] is None):
            raise ValueError(
                "'events_path' and 'registrations_path' must be given together"
            )
        return values


class EpisodeSection(BaseModel):
    """Configure the episode, i.e. the days since registration, to model."""

    day: int = Field(default=1, ge=1)


class SplitSection(BaseModel):
    """Configure the holdout split; a cutoff ordinal takes precedence."""

    holdout_fraction: Optional[float] = Field(default=0.2, gt=0.0, lt=1.0)
    cutoff_ordinal: Optional[int] = Field(default=None, ge=1)

    @root_validator(skip_on_failure=True)
    def check_mode(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        """Ensure that some split mode is configured."""
        if values["holdout_fraction"] is None and values["cutoff_ordinal"] is None:
            raise ValueError("either 'holdout_fraction' or 'cutoff_ordinal' is needed")
        return values


class FeaturesSection(BaseModel):
    """Configure the feature importance filter; no `top_k` keeps every feature."""

    top_k: Optional[int] = Field(default=50, ge=1)
    n_bins: int = Field(default=10, ge=2)


class PropensitySection(BaseModel):
    """Configure the propensity model."""

    source: PropensitySource = PropensitySource.Estimated
    l2: float = Field(default=1e-4, ge=0.0)
    max_iter: int = Field(default=100, ge=1)

    @validator("source", pre=True)
    def parse_boolean(cls, value: Any) -> Any:
        """Accept the unquoted YAML scalar `true` for the generator propensity."""
        return PropensitySource.Generator.value if value is True else value


class TrimSection(BaseModel):
    """Configure the positivity bounds."""

    low: float = Field(default=0.01, ge=0.0, lt=1.0)
    high: float = Field(default=0.99, gt=0.0, le=1.0)

    @root_validator(skip_on_failure=True)
    def check_bounds(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        """Ensure that the bounds are ordered."""
        if values["low"] >= values["high"]:
            raise ValueError("'low' must be smaller than 'high'")
        return values


class ForestSection(BaseModel):
    """Configure the uplift forest ensemble."""

    max_depth: int = Field(default=8, ge=1)
    min_leaf_per_arm: int = Field(default=30, ge=1)
    mtry: Optional[int] = Field(default=None, ge=1)
    divergence: Divergence = Divergence.KL
    smoothing: float = Field(default=DEFAULT_SMOOTHING, gt=0.0)
    max_thresholds: int = Field(default=32, ge=1)
    n_trees: int = Field(default=100, ge=1)
    n_forests: int = Field(default=30, ge=1)

    def tree_params(self) -> TreeParams:
        """Return the per-tree hyperparameters."""
        return TreeParams(
            max_depth=self.max_depth,
            min_leaf_per_arm=self.min_leaf_per_arm,
            mtry=self.mtry,
            divergence=self.divergence,
            smoothing=self.smoothing,
            max_thresholds=self.max_thresholds,
        )


class EvaluationSection(BaseModel):
    """Configure the holdout diagnostics."""

    n_bins: int = Field(default=10, ge=1)
    level: float = Field(default=0.95, gt=0.0, lt=1.0)
    predictive_baseline: bool = True


class OpeSection(BaseModel):
    """Configure the off-policy evaluation."""

    n_grid: int = Field(default=50, ge=1)
    n_reps: int = Field(default=1000, ge=1)
    level: float = Field(default=0.95, gt=0.0, lt=1.0)


class PolicySection(BaseModel):
    """Configure the threshold policy."""

    threshold: float = 0.0


class SurrogateSection(BaseModel):
    """Configure the surrogate decision tree."""

    max_depth: int = Field(default=3, ge=1)


class TrialSection(TrialConfig):
    """Configure the trial simulation and its analysis."""

    counts_path: Optional[Path] = None
    level: float = Field(default=0.95, gt=0.0, lt=1.0)
    method: ComparisonMethod = ComparisonMethod.Pooled
    srm_threshold: float = Field(default=SRM_THRESHOLD, gt=0.0, lt=1.0)

    def trial_config(self) -> TrialConfig:
        """Return the simulation part of the section."""
        return TrialConfig.parse_obj(
            self.dict(include=set(TrialConfig.__fields__), by_alias=False)
        )


class PipelineConfig(BaseModel):
    """
    Define the complete pipeline configuration.

    All randomness derives from `seed`; a section's own seed, where one exists,
    is only used when it is set explicitly.

    """

    seed: int = Field(default=0, ge=0)
    output: OutputSection = Field(default_factory=OutputSection)
    data: DataSection = Field(default_factory=DataSection)
    synthetic: SyntheticSpec = Field(default_factory=SyntheticSpec)
    episode: EpisodeSection = Field(default_factory=EpisodeSection)
    split: SplitSection = Field(default_factory=SplitSection)
    features: FeaturesSection = Field(default_factory=FeaturesSection)
    propensity: PropensitySection = Field(default_factory=PropensitySection)
    trim: TrimSection = Field(default_factory=TrimSection)
    forest: ForestSection = Field(default_factory=ForestSection)
    evaluation: EvaluationSection = Field(default_factory=EvaluationSection)
    ope: OpeSection = Field(default_factory=OpeSection)
    policy: PolicySection = Field(default_factory=PolicySection)
    surrogate: SurrogateSection = Field(default_factory=SurrogateSection)
    trial: TrialSection = Field(default_factory=TrialSection)

    def for_day(self, day: int) -> "PipelineConfig":
        """Return a copy of the configuration for another episode day."""
        return self.copy(update={"episode": EpisodeSection(day=day)})


def _describe(error: ValidationError) -> str:
    messages = []
    for item in error.errors():
        location = [str(part) for part in item["loc"] if part != "__root__"]
        if item["type"] == "value_error.extra":
            section = ".".join(location[:-1]) or "<top level>"
            messages.append(f"Unknown key '{location[-1]}' in section '{section}'")
        elif location:
            messages.append(f"Invalid value for '{'.'.join(location)}': {item['msg']}")
        else:
            messages.append(item["msg"])
    return "; ".join(messages) + "."


def _parse_scalar(text: str) -> Any:
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError:
        return text


def apply_overrides(raw: Dict[str, Any], overrides: Sequence[str]) -> Dict[str, Any]:
    """
    Apply dotted `section.key=value` overrides to a raw configuration.

    Values are parsed as YAML scalars, e.g. `forest.n_trees=20` sets an integer
    and `split.holdout_fraction=null` clears a value.

    Raises:
        ConfigurationError: If an override lacks `=` or its path crosses a value
            that is not a section.

    """
    raw = json.loads(json.dumps(raw, default=str))
    for override in overrides:
        path, separator, value = override.partition("=")
        keys = [key.strip() for key in path.split(".")]
        if not separator or not all(keys):
            raise ConfigurationError(
                f"The override '{override}' is not of the form 'section.key=value'."
            )
        node = raw
        for depth, key in enumerate(keys[:-1]):
            child = node.setdefault(key, {})
            if not isinstance(child, dict):
                prefix = ".".join(keys[: depth + 1])
                raise ConfigurationError(
                    f"The override '{override}' addresses '{prefix}' which is "
                    f"not a section."
                )
            node = child
        node[keys[-1]] = _parse_scalar(value)
    return raw


def load_config(
    path: Optional[Union[str, Path]] = None, overrides: Sequence[str] = ()
) -> PipelineConfig:
    """
    Load and validate a pipeline configuration.

    Args:
        path: A YAML file; without one every default applies.
        overrides: Dotted `section.key=value` overrides applied on top.

    Raises:
        ConfigurationError: If the file cannot be read or parsed, a key is unknown
            or a value is invalid.

    """
    raw: Any = {}
    if path is not None:
        path = Path(path)
        try:
            raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        except OSError as error:
            raise ConfigurationError(
                f"Cannot read the configuration '{path}': {error.strerror}."
            ) from error
        except yaml.YAMLError as error:
            raise ConfigurationError(
                f"The configuration '{path}' is not valid YAML: {error}"
            ) from error
        if not isinstance(raw, dict):
            raise ConfigurationError(
                f"The configuration '{path}' must be a mapping of sections."
            )
    raw = apply_overrides(raw, overrides)
    try:
        config = PipelineConfig.parse_obj(raw)
    except ValidationError as error:
        raise ConfigurationError(_describe(error)) from error
    logger.debug("Loaded the configuration with hash %s.", config_hash(config))
    return config


def effective_config(config: PipelineConfig) -> Dict[str, Any]:
    """Return the fully resolved configuration as plain data."""
    return json.loads(config.json(by_alias=False, exclude_none=False))


def config_hash(config: PipelineConfig) -> str:
    """Return a digest of the fully resolved configuration."""
    return stable_hash(effective_config(config))


def write_effective_config(config: PipelineConfig, directory: Path) -> Path:
    """Write the fully resolved configuration into a directory."""
    path = Path(directory) / EFFECTIVE_CONFIG_NAME
    path.write_text(
        yaml.safe_dump(effective_config(config), sort_keys=False), encoding="utf-8"
    )
    return path

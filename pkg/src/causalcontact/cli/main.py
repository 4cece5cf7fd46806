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


"""Provide the `causalcontact` command line interface."""


import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from pydantic import ValidationError

from .. import __version__
from ..exceptions import CausalContactError, ConfigurationError, DataError
from .config import PipelineConfig, load_config
from .settings import CausalContactSettings
from .steps import run_pipeline, run_step, select_decision_day
from .workspace import Workspace


__all__ = ("main", "build_parser", "run_command")


logger = logging.getLogger(__name__)


DESCRIPTIONS = {
    "synth": "Generate a synthetic world with known treatment effects.",
    "ingest": "Load, slice and split the logged rows.",
    "select-features": "Rank features by uplift importance and keep the leading ones.",
    "fit-propensity": "Estimate the probability of contact for every row.",
    "trim": "Remove rows outside the positivity bounds.",
    "train": "Fit the uplift forest ensemble.",
    "evaluate": "Write Qini, AUC and calibration diagnostics on the holdout.",
    "ope": "Estimate policy values offline with bootstrap intervals.",
    "policy-export": "Write the threshold policy and its recommendations.",
    "distill": "Distill the policy into a shallow decision tree.",
    "trial-simulate": "Simulate a randomized trial of the policy.",
    "trial-analyze": "Analyze a trial counts table.",
    "pipeline": "Run every step for one episode day or a range of days.",
}


class _ArgumentParser(argparse.ArgumentParser):
    """Report usage errors as configuration errors."""

    def error(self, message: str) -> None:
        """Raise a configuration error instead of exiting."""
        raise ConfigurationError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    """Return the argument parser with one sub-command per step."""
    common = _ArgumentParser(add_help=False)
    common.add_argument(
        "-c", "--config", type=Path, help="The YAML pipeline configuration."
    )
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="Override a configuration value; may be repeated.",
    )
    common.add_argument(
        "--threads", type=int, help="Cap the number of parallel workers."
    )
    common.add_argument(
        "--log-level", help="The logging level, e.g. INFO (default WARNING)."
    )
    parser = _ArgumentParser(
        prog="causalcontact",
        description="Learn, evaluate and validate contact policies from logged "
        "decisions.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True
    for name, description in DESCRIPTIONS.items():
        command = commands.add_parser(
            name, parents=[common], help=description, description=description
        )
        if name == "pipeline":
            command.add_argument(
                "--repeat-days",
                type=int,
                metavar="D",
                help="Train a separate model for each episode day 1..D and select "
                "the best day.",
            )
        elif name == "trial-analyze":
            command.add_argument(
                "--counts", type=Path, help="A counts table to analyze."
            )
    return parser


def _output_directory(config: PipelineConfig, root: Path) -> Path:
    directory = config.output.directory
    return directory if directory.is_absolute() else root / directory


def run_command(
    command: str,
    config: PipelineConfig,
    output_root: Path,
    threads: int = 1,
    repeat_days: Optional[int] = None,
) -> Path:
    """
    Run a sub-command and return its output directory.

    Raises:
        CausalContactError: If any step fails.

    """
    directory = _output_directory(config, output_root)
    if command != "pipeline":
        run_step(Workspace(directory, config, threads), command)
        return directory
    if repeat_days is None:
        run_pipeline(Workspace(directory, config, threads))
        return directory
    if repeat_days < 1:
        raise ConfigurationError(
            f"--repeat-days must be at least 1, got {repeat_days}."
        )
    day_workspaces = {}
    for day in range(1, repeat_days + 1):
        day_config = config.for_day(day)
        workspace = Workspace(directory / f"day-{day}", day_config, threads)
        run_pipeline(workspace)
        day_workspaces[day] = workspace
    select_decision_day(Workspace(directory, config, threads), day_workspaces)
    return directory


def _report(error: BaseException, code: int) -> None:
    message = json.dumps(str(error), ensure_ascii=False)
    print(
        f"error code={code} type={type(error).__name__} message={message}",
        file=sys.stderr,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the command line interface.

    Returns:
        int: 0 on success, 1 for usage or configuration errors, 2 for data errors
            and 3 for degenerate estimates.

    """
    try:
        args = build_parser().parse_args(argv)
        try:
            settings = CausalContactSettings()
        except ValidationError as error:
            raise ConfigurationError(
                f"Invalid environment settings: {error}"
            ) from error
        level = (args.log_level or settings.log_level).upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ConfigurationError(f"Unknown logging level '{args.log_level}'.")
        logging.basicConfig(
            level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
        )
        overrides: List[str] = list(args.overrides)
        if getattr(args, "counts", None) is not None:
            overrides.append(f"trial.counts_path={args.counts}")
        config = load_config(args.config, overrides)
        threads = args.threads if args.threads is not None else settings.threads
        if threads < 1:
            raise ConfigurationError(f"--threads must be at least 1, got {threads}.")
        directory = run_command(
            args.command,
            config,
            settings.output_root,
            threads,
            getattr(args, "repeat_days", None),
        )
    except CausalContactError as error:
        logger.debug("The command failed.", exc_info=True)
        _report(error, error.exit_code)
        return error.exit_code
    except OSError as error:
        logger.debug("The command failed.", exc_info=True)
        _report(error, DataError.exit_code)
        return DataError.exit_code
    except Exception as error:
        logger.debug("The command failed.", exc_info=True)
        _report(error, CausalContactError.exit_code)
        return CausalContactError.exit_code
    logger.info("Wrote the outputs of '%s' to '%s'.", args.command, directory)
    return 0


if __name__ == "__main__":
    sys.exit(main())

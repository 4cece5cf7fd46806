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


"""Implement the pipeline steps run by the command line interface."""


import logging
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from ..baseline import (
    Target,
    TrimReport,
    fit_logistic,
    trim_positivity,
)
from ..data import (
    Dataset,
    generate_synthetic,
    label_lead_days,
    load_dataset,
    load_events,
    save_dataset,
    slice_episode,
    split_holdout,
)
from ..evaluation import calibration, evaluate_scores
from ..exceptions import DataError
from ..experiment import analyze_trial, load_counts, simulate_trial
from ..helpers import derive_seed
from ..ope import (
    PolicyValueReport,
    compare_decision_days,
    ope_curve,
    policy_value_report,
)
from ..policy import (
    ThresholdPolicy,
    distill_surrogate,
    load_policy,
    recommend_batch,
    save_policy,
)
from ..uplift import (
    UpliftEnsemble,
    UpliftEnsembleIO,
    feature_importance_filter,
    fit_ensemble,
    predict_cate_batch,
    select_top_k,
)
from .config import DataSource, PropensitySource
from .workspace import Workspace


__all__ = ("STEPS", "PIPELINE_ORDER", "run_step", "run_pipeline", "select_decision_day")


logger = logging.getLogger(__name__)


WORLD = "world.csv"
TRAIN = "train.csv"
HOLDOUT = "holdout.csv"
SELECTED = "selected_features.csv"
PROPENSITIES = "propensities.csv"
TRAIN_TRIMMED = "train_trimmed.csv"
HOLDOUT_TRIMMED = "holdout_trimmed.csv"
TRIM_REPORT = "train_trim_report.json"
POLICY_VALUE = "policy_value.json"
TRIAL_COUNTS = "trial_counts.csv"
DAY_SELECTION = "day_selection.json"


def _document_name(workspace: Workspace, stem: str) -> str:
    return f"{stem}.json.gz" if workspace.config.output.compress else f"{stem}.json"


def _train(workspace: Workspace) -> Dataset:
    if TRAIN not in workspace.cache:
        workspace.cache[TRAIN] = load_dataset(
            workspace.input(TRAIN, "ingest"), workspace.config.data.horizon_days
        )
    return workspace.cache[TRAIN]


def _holdout(workspace: Workspace) -> Dataset:
    if HOLDOUT not in workspace.cache:
        workspace.cache[HOLDOUT] = load_dataset(
            workspace.input(HOLDOUT, "ingest"),
            workspace.config.data.horizon_days,
            schema=_train(workspace).schema,
        )
    return workspace.cache[HOLDOUT]


def _trimmed(workspace: Workspace) -> Tuple[Dataset, Dataset]:
    """Return the trimmed splits in the training schema with their propensity source."""
    if TRAIN_TRIMMED not in workspace.cache:
        schema = _train(workspace).schema
        source = TrimReport.load(workspace.input(TRIM_REPORT, "trim")).propensity_source
        splits = []
        for name in (TRAIN_TRIMMED, HOLDOUT_TRIMMED):
            dataset = load_dataset(
                workspace.input(name, "trim"),
                workspace.config.data.horizon_days,
                schema=schema,
            )
            splits.append(dataset.with_propensity(dataset.propensity, source))
        workspace.cache[TRAIN_TRIMMED] = tuple(splits)
    return workspace.cache[TRAIN_TRIMMED]


def _selected_features(workspace: Workspace) -> List[str]:
    frame = pd.read_csv(workspace.input(SELECTED, "select-features"))
    return frame["feature"].astype(str).tolist()


def _ensemble(workspace: Workspace) -> UpliftEnsemble:
    if "ensemble" not in workspace.cache:
        path = workspace.input(_document_name(workspace, "ensemble"), "train")
        ensemble_io = UpliftEnsembleIO.load(path)
        workspace.cache["ensemble"] = UpliftEnsemble.hydrate(ensemble_io)
    return workspace.cache["ensemble"]


def _policy(workspace: Workspace) -> Tuple[ThresholdPolicy, UpliftEnsemble]:
    return load_policy(
        workspace.input(_document_name(workspace, "policy"), "policy-export")
    )


def run_synth(workspace: Workspace) -> None:
    """Generate the synthetic world of the configured episode day."""
    config = workspace.config
    update = {"day_index": config.episode.day}
    if "seed" not in config.synthetic.__fields_set__:
        update["seed"] = derive_seed(config.seed, f"synthetic-day-{config.episode.day}")
    world = generate_synthetic(config.synthetic.copy(update=update))
    save_dataset(world, workspace.path(WORLD))


def _registration_dates(path) -> Dict[str, object]:
    try:
        frame = pd.read_csv(path, dtype={"lead_id": str})
        dates = pd.to_datetime(frame["registration_date"]).dt.date
    except KeyError as error:
        raise DataError(
            f"The registrations file '{path}' lacks the column {error}."
        ) from error
    except (ValueError, pd.errors.ParserError) as error:
        raise DataError(
            f"Cannot parse the registrations file '{path}': {error}"
        ) from error
    return dict(zip(frame["lead_id"], dates))


def run_ingest(workspace: Workspace) -> None:
    """Load, slice and split the logged rows and label an event log if given."""
    config = workspace.config
    data = config.data
    if data.source is DataSource.Synthetic:
        path = workspace.input(WORLD, "synth")
    else:
        path = workspace.register_input(data.path)
    dataset = load_dataset(path, data.horizon_days, strict=data.strict)
    episode = slice_episode(dataset, config.episode.day)
    if data.holdout_path is not None:
        holdout = load_dataset(
            workspace.register_input(data.holdout_path),
            data.horizon_days,
            strict=data.strict,
            schema=dataset.schema,
        )
        train, holdout = episode, slice_episode(holdout, config.episode.day)
    else:
        cutoff = config.split.cutoff_ordinal
        fraction = None if cutoff is not None else config.split.holdout_fraction
        train, holdout = split_holdout(
            episode,
            holdout_fraction=fraction,
            cutoff_ordinal=cutoff,
            seed=derive_seed(config.seed, "split"),
        )
    save_dataset(train, workspace.path(TRAIN))
    save_dataset(holdout, workspace.path(HOLDOUT))
    if data.events_path is not None:
        events = load_events(workspace.register_input(data.events_path))
        registrations = _registration_dates(
            workspace.register_input(data.registrations_path)
        )
        labels, n_excluded = label_lead_days(
            events, registrations, data.n_days, data.decision_hour
        )
        labels.to_csv(workspace.path("action_labels.csv"), index=False)
        logger.info("Labeled %d lead-days; %d were excluded.", len(labels), n_excluded)


def run_select_features(workspace: Workspace) -> None:
    """Rank the features by uplift importance and keep the leading ones."""
    config = workspace.config.features
    train = _train(workspace)
    report = feature_importance_filter(train, n_bins=config.n_bins)
    report.dump(workspace.path("feature_importance.json"), indent=2)
    if config.top_k is None:
        selected = list(train.feature_names)
    else:
        selected = list(select_top_k(report, config.top_k))
    pd.DataFrame(
        {"feature": selected, "score": [report.scores[name] for name in selected]}
    ).to_csv(workspace.path(SELECTED), index=False)


def run_fit_propensity(workspace: Workspace) -> None:
    """Estimate or collect the propensities of both splits."""
    config = workspace.config.propensity
    train, holdout = _train(workspace), _holdout(workspace)
    if config.source is PropensitySource.Estimated:
        model = fit_logistic(
            train,
            Target.Action,
            l2=config.l2,
            max_iter=config.max_iter,
            features=_selected_features(workspace),
        )
        model.to_io().dump(workspace.path("propensity_model.json"), indent=2)
        scores = {"train": model.predict_dataset(train)}
        scores["holdout"] = model.predict_dataset(holdout)
    else:
        if train.propensity is None or holdout.propensity is None:
            raise DataError(
                f"The '{config.source.value}' propensity source needs a propensity "
                f"column in the data; use the 'estimated' source instead."
            )
        scores = {"train": train.propensity, "holdout": holdout.propensity}
    frames = [
        pd.DataFrame({"split": name, "id": dataset.ids, "propensity": scores[name]})
        for name, dataset in (("train", train), ("holdout", holdout))
    ]
    pd.concat(frames, ignore_index=True).to_csv(
        workspace.path(PROPENSITIES), index=False
    )


def run_trim(workspace: Workspace) -> None:
    """Remove rows outside the positivity bounds from both splits."""
    config = workspace.config
    frame = pd.read_csv(workspace.input(PROPENSITIES, "fit-propensity"))
    source = config.propensity.source.value
    for split, name in (("train", TRAIN_TRIMMED), ("holdout", HOLDOUT_TRIMMED)):
        dataset = _train(workspace) if split == "train" else _holdout(workspace)
        rows = frame[frame["split"] == split]
        if len(rows) != len(dataset) or not np.array_equal(
            rows["id"].astype(str).to_numpy(), dataset.ids.astype(str)
        ):
            raise DataError(
                f"The {split} propensities do not match the {split} rows; rerun the "
                f"'fit-propensity' step."
            )
        trimmed, report = trim_positivity(
            dataset,
            rows["propensity"].to_numpy(dtype=float),
            low=config.trim.low,
            high=config.trim.high,
            source=source,
        )
        save_dataset(trimmed, workspace.path(name))
        report.dump(workspace.path(f"{split}_trim_report.json"), indent=2)


def run_train(workspace: Workspace) -> None:
    """Fit the uplift forest ensemble on the trimmed training rows."""
    config = workspace.config
    train, _ = _trimmed(workspace)
    ensemble = fit_ensemble(
        train,
        config.forest.tree_params(),
        n_trees=config.forest.n_trees,
        n_forests=config.forest.n_forests,
        seed=derive_seed(config.seed, "forest"),
        features=_selected_features(workspace),
        n_jobs=workspace.n_jobs,
    )
    ensemble.to_io().dump(workspace.path(_document_name(workspace, "ensemble")))
    workspace.cache["ensemble"] = ensemble


def run_evaluate(workspace: Workspace) -> None:
    """Write the Qini, AUC and calibration diagnostics on the trimmed holdout."""
    config = workspace.config
    train, holdout = _trimmed(workspace)
    cate = predict_cate_batch(_ensemble(workspace), holdout)
    predictive: Optional[np.ndarray] = None
    if config.evaluation.predictive_baseline:
        outcome_model = fit_logistic(
            train,
            Target.Outcome,
            l2=config.propensity.l2,
            max_iter=config.propensity.max_iter,
            features=_selected_features(workspace),
        )
        outcome_model.to_io().dump(workspace.path("outcome_model.json"), indent=2)
        predictive = outcome_model.predict_dataset(holdout)
    report, uplift_curve, predictive_curve = evaluate_scores(holdout, cate, predictive)
    report.dump(workspace.path("evaluation.json"), indent=2)
    uplift_curve.to_frame().to_csv(workspace.path("qini_uplift.csv"), index=False)
    if predictive_curve is not None:
        predictive_curve.to_frame().to_csv(
            workspace.path("qini_predictive.csv"), index=False
        )
    bins = calibration(cate, holdout, config.evaluation.n_bins, config.evaluation.level)
    bins.dump(workspace.path("calibration.json"), indent=2)
    bins.to_frame().to_csv(workspace.path("calibration.csv"), index=False)
    predictions = pd.DataFrame({"id": holdout.ids, "cate": cate})
    if predictive is not None:
        predictions["predicted_outcome"] = predictive
    predictions.to_csv(workspace.path("holdout_predictions.csv"), index=False)


def run_ope(workspace: Workspace) -> None:
    """Estimate the policy values and the OPE curve on the trimmed holdout."""
    config = workspace.config
    _, holdout = _trimmed(workspace)
    cate = predict_cate_batch(_ensemble(workspace), holdout)
    report = policy_value_report(
        holdout,
        cate,
        threshold=config.policy.threshold,
        n_reps=config.ope.n_reps,
        level=config.ope.level,
        seed=derive_seed(config.seed, "ope-report"),
        n_jobs=workspace.n_jobs,
    )
    report.dump(workspace.path(POLICY_VALUE), indent=2)
    cate_curve, random_curve = ope_curve(
        holdout,
        cate,
        n_grid=config.ope.n_grid,
        n_reps=config.ope.n_reps,
        level=config.ope.level,
        seed=derive_seed(config.seed, "ope-curve"),
        n_jobs=workspace.n_jobs,
    )
    pd.concat(
        [cate_curve.to_frame(), random_curve.to_frame()], ignore_index=True
    ).to_csv(workspace.path("ope_curve.csv"), index=False)


def run_policy_export(workspace: Workspace) -> None:
    """Write the policy document and its recommendations for the holdout rows."""
    config = workspace.config
    ensemble = _ensemble(workspace)
    train, _ = _trimmed(workspace)
    policy = ThresholdPolicy.for_ensemble(ensemble, config.policy.threshold)
    ids = np.sort(train.ids)
    save_policy(
        policy,
        ensemble,
        workspace.path(_document_name(workspace, "policy")),
        episode_day=config.episode.day,
        training_range=(str(ids[0]), str(ids[-1])),
    )
    recommend_batch(policy, ensemble, _holdout(workspace)).to_csv(
        workspace.path("recommendations.csv")
    )


def run_distill(workspace: Workspace) -> None:
    """Distill the exported policy into a shallow decision tree."""
    policy, ensemble = _policy(workspace)
    surrogate = distill_surrogate(
        policy, ensemble, _holdout(workspace), workspace.config.surrogate.max_depth
    )
    surrogate.to_io().dump(workspace.path("surrogate.json"), indent=2)
    workspace.path("surrogate.txt").write_text(surrogate.to_text(), encoding="utf-8")


def run_trial_simulate(workspace: Workspace) -> None:
    """Simulate a randomized trial of the exported policy on the holdout items."""
    config = workspace.config
    holdout = _holdout(workspace)
    if not holdout.has_potential_outcomes:
        raise DataError(
            "Simulating a trial requires potential outcomes, i.e. a synthetic world."
        )
    policy, ensemble = _policy(workspace)
    trial = config.trial.trial_config()
    if "seed" not in config.trial.__fields_set__:
        trial = trial.copy(update={"seed": derive_seed(config.seed, "trial")})
    result = simulate_trial(holdout, recommend_batch(policy, ensemble, holdout), trial)
    result.to_frame().to_csv(workspace.path("trial_items.csv"), index=False)
    result.to_counts().to_csv(workspace.path(TRIAL_COUNTS), index=False)


def run_trial_analyze(workspace: Workspace) -> None:
    """Analyze the configured counts table or the simulated trial's counts."""
    trial = workspace.config.trial
    if trial.counts_path is not None:
        counts = load_counts(workspace.register_input(trial.counts_path))
    else:
        counts = load_counts(workspace.input(TRIAL_COUNTS, "trial-simulate"))
    analysis = analyze_trial(
        counts,
        level=trial.level,
        method=trial.method,
        srm_threshold=trial.srm_threshold,
        expected_ratio=trial.assignment_probability,
    )
    analysis.dump(workspace.path("trial_analysis.json"), indent=2)
    analysis.to_frame().to_csv(workspace.path("trial_analysis.csv"), index=False)


STEPS: Dict[str, Callable[[Workspace], None]] = {
    "synth": run_synth,
    "ingest": run_ingest,
    "select-features": run_select_features,
    "fit-propensity": run_fit_propensity,
    "trim": run_trim,
    "train": run_train,
    "evaluate": run_evaluate,
    "ope": run_ope,
    "policy-export": run_policy_export,
    "distill": run_distill,
    "trial-simulate": run_trial_simulate,
    "trial-analyze": run_trial_analyze,
}

PIPELINE_ORDER = tuple(STEPS)


def run_step(workspace: Workspace, name: str) -> None:
    """Run one step with staged outputs."""
    with workspace.step(name):
        STEPS[name](workspace)


def run_pipeline(workspace: Workspace) -> None:
    """
    Run every step for one episode day.

    Generation is skipped for file data and the trial steps are skipped when
    neither potential outcomes nor a counts table are available.

    """
    synthetic = workspace.config.data.source is DataSource.Synthetic
    for name in PIPELINE_ORDER:
        if name == "synth" and not synthetic:
            continue
        if name == "trial-simulate" and not _holdout(workspace).has_potential_outcomes:
            logger.info("Skipping the trial simulation without potential outcomes.")
            continue
        if (
            name == "trial-analyze"
            and workspace.config.trial.counts_path is None
            and not workspace.has(TRIAL_COUNTS)
        ):
            logger.info("Skipping the trial analysis without a counts table.")
            continue
        run_step(workspace, name)


def select_decision_day(
    workspace: Workspace, day_workspaces: Dict[int, Workspace]
) -> None:
    """Compare the per-day policy value reports and write the day selection."""
    with workspace.step("select-day"):
        reports = {
            day: PolicyValueReport.load(day_workspace.input(POLICY_VALUE, "ope"))
            for day, day_workspace in day_workspaces.items()
        }
        compare_decision_days(reports).dump(workspace.path(DAY_SELECTION), indent=2)

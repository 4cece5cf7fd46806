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


"""Provide bootstrap uplift forests and ensembles of forests."""


import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from pydantic import Field

from ..abstract_base import AbstractBase
from ..base_model import FORMAT_VERSION, BaseModel, DocumentModel
from ..data import Dataset, FeatureVector
from ..exceptions import DataError
from ..helpers import derive_seeds, stable_hash
from .tree import TreeParams, UpliftTree, UpliftTreeIO, grow_tree


__all__ = (
    "UpliftForest",
    "UpliftEnsemble",
    "UpliftForestIO",
    "UpliftEnsembleIO",
    "fit_forest",
    "fit_ensemble",
    "predict_cate",
    "predict_cate_batch",
    "DEFAULT_N_FORESTS",
    "DEFAULT_N_TREES",
)


logger = logging.getLogger(__name__)


DEFAULT_N_FORESTS = 30
DEFAULT_N_TREES = 100


class UpliftForestIO(BaseModel):
    """Represent a fitted forest on disk."""

    seed: int
    trees: List[UpliftTreeIO] = Field(..., min_items=1)


class UpliftEnsembleIO(DocumentModel):
    """
    Represent a fitted ensemble of uplift forests on disk.

    Attributes:
        feature_names (list of str): The design columns the trees index into.
        schema_hash (str): A digest of the feature names.
        params (TreeParams): The tree hyperparameters.
        seed (int): The master seed.
        forests (list of UpliftForestIO): The forests with their trees.

    """

    feature_names: List[str] = Field(..., alias="featureNames")
    schema_hash: str = Field(..., alias="schemaHash")
    params: TreeParams
    seed: int
    forests: List[UpliftForestIO] = Field(..., min_items=1)


class UpliftForest(AbstractBase):
    """Represent bootstrap uplift trees whose mean leaf uplift is the prediction."""

    _repr_attributes = ("n_trees", "seed")

    def __init__(self, *, trees: Sequence[UpliftTree], seed: int, **kwargs) -> None:
        """Initialize a forest from its trees."""
        super().__init__(**kwargs)
        if not trees:
            raise DataError("A forest needs at least one tree.")
        self.trees = tuple(trees)
        self.seed = int(seed)
        self._freeze()

    @property
    def n_trees(self) -> int:
        """Return the number of trees."""
        return len(self.trees)

    def predict(self, matrix: np.ndarray) -> np.ndarray:
        """Return the mean leaf uplift over the trees for every row."""
        return np.mean(np.stack([tree.predict(matrix) for tree in self.trees]), axis=0)

    @classmethod
    def hydrate(cls, forest_io: UpliftForestIO, smoothing: float) -> "UpliftForest":
        """Hydrate a new UpliftForest instance from its IO."""
        return cls(
            trees=[UpliftTree.hydrate(tree, smoothing) for tree in forest_io.trees],
            seed=forest_io.seed,
        )

    def to_io(self) -> UpliftForestIO:
        """Return the serializable representation of this forest."""
        return UpliftForestIO(
            seed=self.seed, trees=[tree.to_io() for tree in self.trees]
        )


class UpliftEnsemble(AbstractBase):
    """
    Represent an ensemble of uplift forests.

    The CATE estimate of a row is the mean over forests of the mean over trees of
    the leaf uplift the row reaches.

    Attributes:
        feature_names (tuple of str): The design columns in model order.
        params (TreeParams): The tree hyperparameters.
        seed (int): The master seed.
        forests (tuple of UpliftForest): The forests.

    """

    _repr_attributes = ("n_forests", "seed")

    def __init__(
        self,
        *,
        feature_names: Sequence[str],
        params: TreeParams,
        seed: int,
        forests: Sequence[UpliftForest],
        **kwargs,
    ) -> None:
        """Initialize an ensemble from its forests."""
        super().__init__(**kwargs)
        if not forests:
            raise DataError("An ensemble needs at least one forest.")
        self.feature_names = tuple(feature_names)
        self.params = params
        self.seed = int(seed)
        self.forests = tuple(forests)
        self._freeze()

    @property
    def n_forests(self) -> int:
        """Return the number of forests."""
        return len(self.forests)

    @property
    def schema_hash(self) -> str:
        """Return a digest of the ensemble's feature names."""
        return stable_hash(list(self.feature_names))

    def predict_forests(self, matrix: np.ndarray) -> np.ndarray:
        """Return the per-forest predictions with shape (n_forests, n_rows)."""
        return np.stack([forest.predict(matrix) for forest in self.forests])

    def predict(self, matrix: np.ndarray) -> np.ndarray:
        """Return the CATE estimate for every row of a matrix in model order."""
        return np.mean(self.predict_forests(matrix), axis=0)

    @classmethod
    def hydrate(cls, ensemble_io: UpliftEnsembleIO) -> "UpliftEnsemble":
        """Hydrate a new UpliftEnsemble instance from its IO."""
        if ensemble_io.schema_hash != stable_hash(ensemble_io.feature_names):
            raise DataError("The ensemble schema hash does not match its features.")
        smoothing = ensemble_io.params.smoothing
        return cls(
            feature_names=ensemble_io.feature_names,
            params=ensemble_io.params,
            seed=ensemble_io.seed,
            forests=[UpliftForest.hydrate(f, smoothing) for f in ensemble_io.forests],
        )

    def to_io(self) -> UpliftEnsembleIO:
        """Return the serializable representation of this ensemble."""
        return UpliftEnsembleIO(
            format_version=FORMAT_VERSION,
            feature_names=list(self.feature_names),
            schema_hash=self.schema_hash,
            params=self.params,
            seed=self.seed,
            forests=[forest.to_io() for forest in self.forests],
        )


def _canonical_arrays(
    dataset: Dataset, features: Optional[Sequence[str]]
) -> Tuple[Tuple[str, ...], np.ndarray, np.ndarray, np.ndarray]:
    """Return the training arrays sorted by id so that storage order is irrelevant."""
    names = dataset.feature_names if features is None else tuple(features)
    order = np.argsort(dataset.ids, kind="stable")
    matrix = np.ascontiguousarray(dataset.matrix(names)[order])
    return names, matrix, dataset.action[order], dataset.outcome[order]


def _bootstrap_tree(
    matrix: np.ndarray,
    action: np.ndarray,
    outcome: np.ndarray,
    params: TreeParams,
    seed: int,
) -> UpliftTree:
    rng = np.random.default_rng(seed)
    sample = rng.integers(0, matrix.shape[0], size=matrix.shape[0])
    return grow_tree(matrix[sample], action[sample], outcome[sample], params, seed, rng)


def _grow_forest(
    matrix: np.ndarray,
    action: np.ndarray,
    outcome: np.ndarray,
    params: TreeParams,
    n_trees: int,
    seed: int,
    n_jobs: int = 1,
) -> UpliftForest:
    seeds = derive_seeds(seed, n_trees)
    trees = Parallel(n_jobs=n_jobs)(
        delayed(_bootstrap_tree)(matrix, action, outcome, params, tree_seed)
        for tree_seed in seeds
    )
    return UpliftForest(trees=trees, seed=seed)


def fit_forest(
    dataset: Dataset,
    params: TreeParams,
    n_trees: int = DEFAULT_N_TREES,
    seed: int = 0,
    features: Optional[Sequence[str]] = None,
    n_jobs: int = 1,
) -> UpliftForest:
    """
    Fit a forest of uplift trees on bootstrap samples.

    Each tree draws a bootstrap sample of the dataset size, with replacement,
    from a seed derived from `seed` and the tree index; trees are therefore
    identical for any `n_jobs`.

    Raises:
        DataError: If `n_trees < 1` or only one action is present.

    """
    if n_trees < 1:
        raise DataError(f"A forest needs at least one tree, got n_trees={n_trees}.")
    _, matrix, action, outcome = _canonical_arrays(dataset, features)
    return _grow_forest(matrix, action, outcome, params, n_trees, seed, n_jobs)


def fit_ensemble(
    dataset: Dataset,
    params: TreeParams,
    n_trees: int = DEFAULT_N_TREES,
    n_forests: int = DEFAULT_N_FORESTS,
    seed: int = 0,
    features: Optional[Sequence[str]] = None,
    n_jobs: int = 1,
) -> UpliftEnsemble:
    """
    Fit an ensemble of uplift forests.

    The forests differ only by their seeds, which are derived from `seed` and
    the forest index. Forests are fitted in parallel over `n_jobs` workers with
    results independent of the worker count.

    Args:
        dataset (Dataset): The training rows.
        params (TreeParams): The tree hyperparameters.
        n_trees (int): Trees per forest.
        n_forests (int): Forests in the ensemble.
        seed (int): The master seed.
        features (sequence of str, optional): The design columns to use.
        n_jobs (int): The number of parallel workers.

    Returns:
        UpliftEnsemble: The fitted ensemble.

    """
    if n_forests < 1 or n_trees < 1:
        raise DataError(
            f"An ensemble needs at least one forest of one tree, got "
            f"n_forests={n_forests} and n_trees={n_trees}."
        )
    names, matrix, action, outcome = _canonical_arrays(dataset, features)
    forest_seeds = derive_seeds(seed, n_forests)
    logger.info(
        "Fitting %d forests of %d trees on %d rows and %d features.",
        n_forests,
        n_trees,
        matrix.shape[0],
        matrix.shape[1],
    )
    forests = Parallel(n_jobs=n_jobs)(
        delayed(_grow_forest)(matrix, action, outcome, params, n_trees, forest_seed)
        for forest_seed in forest_seeds
    )
    return UpliftEnsemble(
        feature_names=names, params=params, seed=seed, forests=forests
    )


def predict_cate(ensemble: UpliftEnsemble, row: FeatureVector) -> float:
    """
    Return the CATE estimate of one row.

    Raises:
        SchemaMismatchError: If a model feature is absent from the row.

    """
    return float(ensemble.predict(row.select(ensemble.feature_names)[np.newaxis, :])[0])


def predict_cate_batch(ensemble: UpliftEnsemble, dataset: Dataset) -> np.ndarray:
    """
    Return the CATE estimate of every row of a dataset.

    Raises:
        SchemaMismatchError: If a model feature is not part of the schema.

    """
    return ensemble.predict(dataset.matrix(ensemble.feature_names))

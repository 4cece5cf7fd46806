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


"""Provide uplift decision trees with divergence-based splits."""


import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import Field

from ..abstract_base import AbstractBase
from ..base_model import BaseModel
from ..data import Action, Dataset
from ..exceptions import DataError, EstimationError
from .divergence import (
    DEFAULT_SMOOTHING,
    Divergence,
    NodeStats,
    smoothed_rate,
    split_gain_arrays,
)


__all__ = ("TreeParams", "UpliftTree", "UpliftTreeIO", "fit_tree", "LEAF")


logger = logging.getLogger(__name__)


LEAF = -1


class TreeParams(BaseModel):
    """
    Define the hyperparameters of an uplift tree.

    Attributes:
        max_depth (int): The maximum number of splits from root to leaf.
        min_leaf_per_arm (int): The minimum number of treated and of control
            training rows in every leaf.
        mtry (int, optional): Features sampled per split; the ceiling of the square
            root of the number of features by default.
        divergence (Divergence): The split criterion.
        smoothing (float): Pseudo-count added to both outcomes of each arm.
        max_thresholds (int): The maximum number of candidate thresholds per
            feature, chosen at quantiles of the node's values.

    """

    max_depth: int = Field(default=8, ge=1, alias="maxDepth")
    min_leaf_per_arm: int = Field(default=30, ge=1, alias="minLeafPerArm")
    mtry: Optional[int] = Field(default=None, ge=1)
    divergence: Divergence = Divergence.KL
    smoothing: float = Field(default=DEFAULT_SMOOTHING, gt=0.0)
    max_thresholds: int = Field(default=32, ge=1, alias="maxThresholds")

    def resolve_mtry(self, n_features: int) -> int:
        """Return the number of features to sample per split."""
        mtry = math.ceil(math.sqrt(n_features)) if self.mtry is None else self.mtry
        return max(1, min(mtry, n_features)) if n_features else 0


class UpliftTreeIO(BaseModel):
    """
    Represent a fitted tree as flattened node arrays.

    Node 0 is the root. Leaves have feature `-1` and children `-1`.

    """

    seed: int
    feature: List[int]
    threshold: List[float]
    left: List[int]
    right: List[int]
    n_t: List[int] = Field(..., alias="nT")
    n_c: List[int] = Field(..., alias="nC")
    y_t: List[int] = Field(..., alias="yT")
    y_c: List[int] = Field(..., alias="yC")


class UpliftTree(AbstractBase):
    """
    Represent a fitted uplift tree.

    Rows go left when their feature value is at most the node threshold. Every
    node keeps its training `NodeStats`; a leaf predicts its smoothed uplift.

    Attributes:
        feature (numpy.ndarray): The split column per node, `LEAF` for leaves.
        threshold (numpy.ndarray): The split threshold per node.
        left (numpy.ndarray): The left child per node.
        right (numpy.ndarray): The right child per node.
        counts (numpy.ndarray): Shape (n_nodes, 4), the `(n_t, n_c, y_t, y_c)` per
            node.
        smoothing (float): The pseudo-count for leaf rates.
        seed (int): The seed the tree was grown with.

    """

    _repr_attributes = ("n_nodes", "seed")

    def __init__(
        self,
        *,
        feature: Sequence[int],
        threshold: Sequence[float],
        left: Sequence[int],
        right: Sequence[int],
        counts: np.ndarray,
        smoothing: float = DEFAULT_SMOOTHING,
        seed: int = 0,
        **kwargs,
    ) -> None:
        """Initialize a tree from its flattened node arrays."""
        super().__init__(**kwargs)
        self.feature = np.array(feature, dtype=np.int64)
        self.threshold = np.array(threshold, dtype=float)
        self.left = np.array(left, dtype=np.int64)
        self.right = np.array(right, dtype=np.int64)
        self.counts = np.array(counts, dtype=np.int64).reshape(-1, 4)
        n_nodes = self.feature.shape[0]
        if n_nodes == 0 or any(
            array.shape[0] != n_nodes
            for array in (self.threshold, self.left, self.right, self.counts)
        ):
            raise DataError("The tree node arrays are empty or not aligned.")
        self.smoothing = float(smoothing)
        self.seed = int(seed)
        self.value = smoothed_rate(
            self.counts[:, 2], self.counts[:, 0], self.smoothing
        ) - smoothed_rate(self.counts[:, 3], self.counts[:, 1], self.smoothing)
        for array in (
            self.feature,
            self.threshold,
            self.left,
            self.right,
            self.counts,
            self.value,
        ):
            array.flags.writeable = False
        self._freeze()

    @property
    def n_nodes(self) -> int:
        """Return the number of nodes."""
        return int(self.feature.shape[0])

    @property
    def leaves(self) -> np.ndarray:
        """Return the indices of the leaf nodes."""
        return np.flatnonzero(self.feature == LEAF)

    @property
    def depth(self) -> int:
        """Return the length of the longest root-to-leaf path."""
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        for node in range(self.n_nodes):
            if self.feature[node] != LEAF:
                depths[self.left[node]] = depths[node] + 1
                depths[self.right[node]] = depths[node] + 1
        return int(depths.max())

    def stats(self, node: int) -> NodeStats:
        """Return the training statistics of a node."""
        n_t, n_c, y_t, y_c = (int(value) for value in self.counts[node])
        return NodeStats(n_t=n_t, n_c=n_c, y_t=y_t, y_c=y_c, smoothing=self.smoothing)

    def apply(self, matrix: np.ndarray) -> np.ndarray:
        """Return the index of the leaf each row reaches."""
        node = np.zeros(matrix.shape[0], dtype=np.int64)
        active = np.flatnonzero(self.feature[node] != LEAF)
        while active.size:
            current = node[active]
            goes_left = (
                matrix[active, self.feature[current]] <= self.threshold[current]
            )
            node[active] = np.where(goes_left, self.left[current], self.right[current])
            active = active[self.feature[node[active]] != LEAF]
        return node

    def predict(self, matrix: np.ndarray) -> np.ndarray:
        """Return the leaf uplift each row reaches."""
        return self.value[self.apply(matrix)]

    @classmethod
    def hydrate(cls, tree_io: UpliftTreeIO, smoothing: float) -> "UpliftTree":
        """Hydrate a new UpliftTree instance from its IO."""
        return cls(
            feature=tree_io.feature,
            threshold=tree_io.threshold,
            left=tree_io.left,
            right=tree_io.right,
            counts=np.column_stack(
                [tree_io.n_t, tree_io.n_c, tree_io.y_t, tree_io.y_c]
            ),
            smoothing=smoothing,
            seed=tree_io.seed,
        )

    def to_io(self) -> UpliftTreeIO:
        """Return the serializable representation of this tree."""
        return UpliftTreeIO(
            seed=self.seed,
            feature=self.feature.tolist(),
            threshold=self.threshold.tolist(),
            left=self.left.tolist(),
            right=self.right.tolist(),
            n_t=self.counts[:, 0].tolist(),
            n_c=self.counts[:, 1].tolist(),
            y_t=self.counts[:, 2].tolist(),
            y_c=self.counts[:, 3].tolist(),
        )


def _candidate_thresholds(values: np.ndarray, limit: int) -> np.ndarray:
    unique = np.unique(values)
    if unique.size < 2:
        return unique[:0]
    midpoints = (unique[:-1] + unique[1:]) / 2.0
    if midpoints.size <= limit:
        return midpoints
    ordered = np.sort(values, kind="stable")
    positions = np.round(np.linspace(0, ordered.size - 1, limit + 2)[1:-1]).astype(int)
    index = np.searchsorted(unique, ordered[positions])
    index = np.unique(index[index < midpoints.size])
    return midpoints[index]


def _node_counts(treated: np.ndarray, outcome: np.ndarray) -> np.ndarray:
    return np.array(
        [
            treated.sum(),
            (~treated).sum(),
            (treated & outcome).sum(),
            (~treated & outcome).sum(),
        ],
        dtype=np.int64,
    )


class _TreeGrower:
    """Grow one tree depth-first over fixed training arrays."""

    def __init__(
        self,
        matrix: np.ndarray,
        treated: np.ndarray,
        outcome: np.ndarray,
        params: TreeParams,
        rng: np.random.Generator,
    ) -> None:
        self.matrix = matrix
        self.treated = treated
        self.outcome = outcome
        self.params = params
        self.rng = rng
        self.mtry = params.resolve_mtry(matrix.shape[1])
        self.feature: List[int] = []
        self.threshold: List[float] = []
        self.left: List[int] = []
        self.right: List[int] = []
        self.counts: List[np.ndarray] = []

    def _add_node(self, counts: np.ndarray) -> int:
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.counts.append(counts)
        return len(self.feature) - 1

    def _best_split(
        self, rows: np.ndarray, parent: np.ndarray
    ) -> Optional[Tuple[int, float]]:
        if self.mtry == 0:
            return None
        minimum = self.params.min_leaf_per_arm
        features = np.sort(
            self.rng.choice(self.matrix.shape[1], size=self.mtry, replace=False)
        )
        best: Optional[Tuple[int, float]] = None
        best_gain = 0.0
        treated = self.treated[rows]
        outcome = self.outcome[rows]
        for j in features:
            values = self.matrix[rows, j]
            thresholds = _candidate_thresholds(values, self.params.max_thresholds)
            if thresholds.size == 0:
                continue
            order = np.argsort(values, kind="stable")
            sorted_values = values[order]
            t = treated[order]
            y = outcome[order]
            cumulative = np.column_stack(
                [
                    np.cumsum(t),
                    np.cumsum(~t),
                    np.cumsum(t & y),
                    np.cumsum(~t & y),
                ]
            )
            n_left = np.searchsorted(sorted_values, thresholds, side="right")
            left = cumulative[n_left - 1]
            right = parent - left
            feasible = (
                (left[:, 0] >= minimum)
                & (left[:, 1] >= minimum)
                & (right[:, 0] >= minimum)
                & (right[:, 1] >= minimum)
            )
            if not feasible.any():
                continue
            gains = split_gain_arrays(
                parent, left, self.params.divergence, self.params.smoothing
            )
            gains = np.where(feasible, gains, -np.inf)
            k = int(np.argmax(gains))
            if gains[k] > best_gain:
                best_gain = float(gains[k])
                best = (int(j), float(thresholds[k]))
        return best

    def grow(self) -> Tuple[List[int], List[float], List[int], List[int], np.ndarray]:
        rows = np.arange(self.matrix.shape[0])
        root = self._add_node(_node_counts(self.treated, self.outcome))
        stack = [(root, rows, 0)]
        while stack:
            node, rows, depth = stack.pop()
            if depth >= self.params.max_depth:
                continue
            split = self._best_split(rows, self.counts[node])
            if split is None:
                continue
            j, threshold = split
            goes_left = self.matrix[rows, j] <= threshold
            left_rows, right_rows = rows[goes_left], rows[~goes_left]
            left = self._add_node(
                _node_counts(self.treated[left_rows], self.outcome[left_rows])
            )
            right = self._add_node(
                _node_counts(self.treated[right_rows], self.outcome[right_rows])
            )
            self.feature[node] = j
            self.threshold[node] = threshold
            self.left[node] = left
            self.right[node] = right
            stack.append((right, right_rows, depth + 1))
            stack.append((left, left_rows, depth + 1))
        return (
            self.feature,
            self.threshold,
            self.left,
            self.right,
            np.vstack(self.counts),
        )


def grow_tree(
    matrix: np.ndarray,
    action: np.ndarray,
    outcome: np.ndarray,
    params: TreeParams,
    seed: int,
    rng: Optional[np.random.Generator] = None,
) -> UpliftTree:
    """
    Grow an uplift tree on raw arrays.

    Args:
        matrix: The design matrix.
        action: The logged actions.
        outcome: The binary outcomes.
        params: The hyperparameters.
        seed: The seed recorded on the tree; it seeds the feature sampling unless
            `rng` is given.
        rng: A generator to continue drawing from.

    Raises:
        DataError: If only one action is present.
        EstimationError: If an arm has fewer than `min_leaf_per_arm` rows.

    """
    treated = np.asarray(action) == Action.Contact
    positive = np.asarray(outcome) == 1
    n_treated = int(treated.sum())
    n_control = treated.size - n_treated
    if n_treated == 0 or n_control == 0:
        raise DataError("Both actions must be present to grow an uplift tree.")
    if min(n_treated, n_control) < params.min_leaf_per_arm:
        raise EstimationError(
            f"The training rows hold {n_treated} treated and {n_control} control rows "
            f"but every leaf needs {params.min_leaf_per_arm} of each."
        )
    rng = np.random.default_rng(seed) if rng is None else rng
    feature, threshold, left, right, counts = _TreeGrower(
        matrix, treated, positive, params, rng
    ).grow()
    return UpliftTree(
        feature=feature,
        threshold=threshold,
        left=left,
        right=right,
        counts=counts,
        smoothing=params.smoothing,
        seed=seed,
    )


def fit_tree(
    dataset: Dataset,
    params: TreeParams,
    seed: int,
    features: Optional[Sequence[str]] = None,
) -> UpliftTree:
    """
    Fit an uplift tree on all rows of a dataset.

    At every node `mtry` features are sampled without replacement; candidate
    thresholds are midpoints between the node's sorted unique values, thinned to
    `max_thresholds` quantiles. The split with the largest positive gain that
    leaves `min_leaf_per_arm` treated and control rows on both sides wins; ties go
    to the lower feature index, then the lower threshold.

    Args:
        dataset (Dataset): The training rows.
        params (TreeParams): The hyperparameters.
        seed (int): The seed of the feature sampling.
        features (sequence of str, optional): The design columns to use; the
            tree's feature indices refer to this order.

    Returns:
        UpliftTree: The fitted tree.

    """
    names = dataset.feature_names if features is None else features
    return grow_tree(
        dataset.matrix(names), dataset.action, dataset.outcome, params, seed
    )

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


"""Distill a policy into a shallow explanatory classification tree."""


import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import Field

from ..abstract_base import AbstractBase
from ..base_model import FORMAT_VERSION, DocumentModel
from ..data import Action, Dataset
from ..exceptions import DataError
from ..uplift import UpliftEnsemble
from .threshold import ThresholdPolicy, action_label, recommend_batch


__all__ = (
    "SurrogateTree",
    "SurrogateTreeIO",
    "distill_surrogate",
    "distill_recommendations",
    "DEFAULT_SURROGATE_DEPTH",
)


logger = logging.getLogger(__name__)


DEFAULT_SURROGATE_DEPTH = 3
_LEAF = -1


class SurrogateTreeIO(DocumentModel):
    """Represent a surrogate tree on disk as flattened node arrays."""

    feature_names: List[str] = Field(..., alias="featureNames")
    feature: List[int]
    threshold: List[float]
    left: List[int]
    right: List[int]
    n_no_contact: List[int] = Field(..., alias="nNoContact")
    n_contact: List[int] = Field(..., alias="nContact")
    fidelity: float = Field(..., ge=0.0, le=1.0)


class SurrogateTree(AbstractBase):
    """
    Represent a classification tree imitating a policy.

    Attributes:
        feature_names (tuple of str): The design columns split on.
        feature (numpy.ndarray): The split column per node, -1 for leaves.
        threshold (numpy.ndarray): Rows at or below the threshold go left.
        left (numpy.ndarray): The left child per node.
        right (numpy.ndarray): The right child per node.
        counts (numpy.ndarray): Shape (n_nodes, 2), the no-contact and contact
            recommendations per node.
        fidelity (float): The share of reference rows on which the tree agrees
            with the policy.

    """

    _repr_attributes = ("depth", "fidelity")

    def __init__(
        self,
        *,
        feature_names: Sequence[str],
        feature: Sequence[int],
        threshold: Sequence[float],
        left: Sequence[int],
        right: Sequence[int],
        counts: np.ndarray,
        fidelity: float,
        **kwargs,
    ) -> None:
        """Initialize a surrogate tree from flattened node arrays."""
        super().__init__(**kwargs)
        self.feature_names = tuple(feature_names)
        self.feature = np.array(feature, dtype=np.int64)
        self.threshold = np.array(threshold, dtype=float)
        self.left = np.array(left, dtype=np.int64)
        self.right = np.array(right, dtype=np.int64)
        self.counts = np.array(counts, dtype=np.int64).reshape(-1, 2)
        if not 0.0 <= fidelity <= 1.0:
            raise DataError(f"The fidelity must lie in [0, 1], got {fidelity}.")
        self.fidelity = float(fidelity)
        self._freeze()

    @property
    def prediction(self) -> np.ndarray:
        """Return the majority action per node; a tie means contact."""
        return np.where(
            self.counts[:, 1] >= self.counts[:, 0], Action.Contact, Action.NoContact
        ).astype(np.int8)

    @property
    def depth(self) -> int:
        """Return the length of the longest root-to-leaf path."""
        depths = np.zeros(self.feature.shape[0], dtype=np.int64)
        for node in np.flatnonzero(self.feature != _LEAF):
            depths[[self.left[node], self.right[node]]] = depths[node] + 1
        return int(depths.max())

    def predict(self, matrix: np.ndarray) -> np.ndarray:
        """Return the imitated action for every row of a matrix in tree order."""
        node = np.zeros(matrix.shape[0], dtype=np.int64)
        for _ in range(self.feature.shape[0]):
            active = np.flatnonzero(self.feature[node] != _LEAF)
            if not active.size:
                break
            current = node[active]
            goes_left = matrix[active, self.feature[current]] <= self.threshold[current]
            node[active] = np.where(goes_left, self.left[current], self.right[current])
        return self.prediction[node]

    def predict_dataset(self, dataset: Dataset) -> np.ndarray:
        """Return the imitated action for every row of a dataset."""
        return self.predict(dataset.matrix(self.feature_names))

    def to_text(self) -> str:
        """Render the tree as nested if/else rules."""
        lines: List[str] = []

        def _render(node: int, indent: int) -> None:
            pad = "    " * indent
            n_no, n_yes = (int(c) for c in self.counts[node])
            total = n_no + n_yes
            if self.feature[node] == _LEAF:
                lines.append(
                    f"{pad}{action_label(self.prediction[node])}  "
                    f"(n={total}, contact share={n_yes / max(total, 1):.2f})"
                )
                return
            name = self.feature_names[self.feature[node]]
            lines.append(f"{pad}if {name} <= {self.threshold[node]:.6g}:")
            _render(int(self.left[node]), indent + 1)
            lines.append(f"{pad}else:")
            _render(int(self.right[node]), indent + 1)

        _render(0, 0)
        lines.append(f"# fidelity: {self.fidelity:.4f}")
        return "\n".join(lines) + "\n"

    @classmethod
    def hydrate(cls, tree_io: SurrogateTreeIO) -> "SurrogateTree":
        """Hydrate a new SurrogateTree instance from its IO."""
        return cls(
            feature_names=tree_io.feature_names,
            feature=tree_io.feature,
            threshold=tree_io.threshold,
            left=tree_io.left,
            right=tree_io.right,
            counts=np.column_stack([tree_io.n_no_contact, tree_io.n_contact]),
            fidelity=tree_io.fidelity,
        )

    def to_io(self) -> SurrogateTreeIO:
        """Return the serializable representation of this tree."""
        return SurrogateTreeIO(
            format_version=FORMAT_VERSION,
            feature_names=list(self.feature_names),
            feature=self.feature.tolist(),
            threshold=self.threshold.tolist(),
            left=self.left.tolist(),
            right=self.right.tolist(),
            n_no_contact=self.counts[:, 0].tolist(),
            n_contact=self.counts[:, 1].tolist(),
            fidelity=self.fidelity,
        )


def _gini_split(
    values: np.ndarray, labels: np.ndarray
) -> Optional[Tuple[float, float]]:
    """Return the lowest weighted child impurity and its threshold for one column."""
    order = np.argsort(values, kind="stable")
    ordered = values[order]
    boundaries = np.flatnonzero(ordered[1:] != ordered[:-1])
    if boundaries.size == 0:
        return None
    positives = np.cumsum(labels[order])
    n = values.size
    n_left = boundaries + 1.0
    n_right = n - n_left
    pos_left = positives[boundaries]
    pos_right = positives[-1] - pos_left
    impurity = (
        2.0 * pos_left * (1.0 - pos_left / n_left)
        + 2.0 * pos_right * (1.0 - pos_right / n_right)
    ) / n
    k = int(np.argmin(impurity))
    threshold = (ordered[boundaries[k]] + ordered[boundaries[k] + 1]) / 2.0
    return float(impurity[k]), float(threshold)


def distill_recommendations(
    dataset: Dataset,
    actions: Sequence[int],
    max_depth: int = DEFAULT_SURROGATE_DEPTH,
    features: Optional[Sequence[str]] = None,
) -> SurrogateTree:
    """
    Fit a Gini classification tree predicting the given actions from features.

    Every midpoint between distinct values is a candidate threshold. A node is
    split when the best split lowers the impurity; ties go to the lower feature
    index, then the lower threshold.

    Raises:
        DataError: If the dataset is empty, the actions are not aligned or
            `max_depth < 1`.

    """
    if max_depth < 1:
        raise DataError(f"The surrogate depth must be at least 1, got {max_depth}.")
    if len(dataset) == 0:
        raise DataError("Cannot distill a policy on an empty dataset.")
    labels = np.asarray(actions, dtype=float)
    if labels.shape != (len(dataset),):
        raise DataError(f"Expected {len(dataset)} actions but got {labels.size}.")
    names = dataset.feature_names if features is None else tuple(features)
    matrix = dataset.matrix(names)
    feature: List[int] = [_LEAF]
    threshold: List[float] = [0.0]
    left: List[int] = [_LEAF]
    right: List[int] = [_LEAF]
    counts: List[Tuple[int, int]] = []

    def _counts(rows: np.ndarray) -> Tuple[int, int]:
        n_yes = int(labels[rows].sum())
        return rows.size - n_yes, n_yes

    counts.append(_counts(np.arange(len(dataset))))
    stack = [(0, np.arange(len(dataset)), 0)]
    while stack:
        node, rows, depth = stack.pop()
        n_no, n_yes = counts[node]
        if depth >= max_depth or n_no == 0 or n_yes == 0:
            continue
        parent = 2.0 * n_yes * (1.0 - n_yes / rows.size) / rows.size
        best: Optional[Tuple[float, int, float]] = None
        for j in range(matrix.shape[1]):
            candidate = _gini_split(matrix[rows, j], labels[rows])
            if candidate is not None and (best is None or candidate[0] < best[0]):
                best = (candidate[0], j, candidate[1])
        if best is None or best[0] >= parent:
            continue
        _, j, cut = best
        goes_left = matrix[rows, j] <= cut
        for child_rows in (rows[goes_left], rows[~goes_left]):
            feature.append(_LEAF)
            threshold.append(0.0)
            left.append(_LEAF)
            right.append(_LEAF)
            counts.append(_counts(child_rows))
        feature[node], threshold[node] = j, cut
        left[node], right[node] = len(feature) - 2, len(feature) - 1
        stack.append((right[node], rows[~goes_left], depth + 1))
        stack.append((left[node], rows[goes_left], depth + 1))

    tree = SurrogateTree(
        feature_names=names,
        feature=feature,
        threshold=threshold,
        left=left,
        right=right,
        counts=np.array(counts),
        fidelity=0.0,
    )
    fidelity = float(np.mean(tree.predict(matrix) == labels))
    logger.info(
        "Distilled a depth-%d surrogate with fidelity %.4f.", tree.depth, fidelity
    )
    return SurrogateTree(
        feature_names=names,
        feature=feature,
        threshold=threshold,
        left=left,
        right=right,
        counts=np.array(counts),
        fidelity=fidelity,
    )


def distill_surrogate(
    policy: ThresholdPolicy,
    ensemble: UpliftEnsemble,
    dataset: Dataset,
    max_depth: int = DEFAULT_SURROGATE_DEPTH,
) -> SurrogateTree:
    """
    Distill a policy's recommendations on a dataset into a surrogate tree.

    The tree is trained on the recommended actions, not on outcomes, and its
    fidelity is measured on the same rows.

    """
    if max_depth < 1:
        raise DataError(f"The surrogate depth must be at least 1, got {max_depth}.")
    recommendations = recommend_batch(policy, ensemble, dataset)
    return distill_recommendations(dataset, recommendations.actions, max_depth)

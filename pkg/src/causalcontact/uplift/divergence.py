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


"""Provide node statistics, divergences and the uplift split gain."""


from enum import Enum, unique
from typing import Union

import numpy as np
from scipy.special import rel_entr

from ..abstract_base import AbstractBase
from ..exceptions import DataError


__all__ = (
    "Divergence",
    "NodeStats",
    "DEFAULT_SMOOTHING",
    "divergence",
    "smoothed_rate",
    "split_gain",
    "split_gain_arrays",
)


DEFAULT_SMOOTHING = 0.5

ArrayLike = Union[float, np.ndarray]


@unique
class Divergence(Enum):
    """Represent the distance between treated and control outcome distributions."""

    KL = "kl"
    Euclidean = "euclidean"
    ChiSquared = "chi_squared"


def smoothed_rate(
    positives: ArrayLike, total: ArrayLike, smoothing: float
) -> ArrayLike:
    """Return the outcome rate with `smoothing` added to both outcome counts."""
    return (positives + smoothing) / (total + 2.0 * smoothing)


def divergence(
    p: ArrayLike, q: ArrayLike, kind: Divergence = Divergence.KL
) -> ArrayLike:
    """
    Return the divergence of the binary distribution `p` from `q`.

    `p` and `q` are the probabilities of a positive outcome. KL uses the natural
    logarithm; Euclidean is the squared distance summed over both outcomes and
    ChiSquared is Pearson's statistic with `q` as reference.

    """
    kind = Divergence(kind)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if kind is Divergence.KL:
        result = rel_entr(p, q) + rel_entr(1.0 - p, 1.0 - q)
    elif kind is Divergence.Euclidean:
        result = 2.0 * (p - q) ** 2
    else:
        result = (p - q) ** 2 / q + (p - q) ** 2 / (1.0 - q)
    return result if result.ndim else float(result)


class NodeStats(AbstractBase):
    """
    Hold the treated and control outcome counts of a tree node.

    Attributes:
        n_t (int): Treated rows.
        n_c (int): Control rows.
        y_t (int): Treated rows with a positive outcome.
        y_c (int): Control rows with a positive outcome.
        smoothing (float): Pseudo-count added to both outcomes of each arm.

    """

    _repr_attributes = ("n_t", "n_c", "y_t", "y_c")

    def __init__(
        self,
        *,
        n_t: int,
        n_c: int,
        y_t: int,
        y_c: int,
        smoothing: float = DEFAULT_SMOOTHING,
        **kwargs,
    ) -> None:
        """Initialize node statistics and check the count constraints."""
        super().__init__(**kwargs)
        if not (0 <= y_t <= n_t and 0 <= y_c <= n_c):
            raise DataError(
                f"Inconsistent node counts: y_t={y_t}, n_t={n_t}, y_c={y_c}, n_c={n_c}."
            )
        if smoothing <= 0:
            raise DataError(f"The smoothing must be positive, got {smoothing}.")
        self.n_t = int(n_t)
        self.n_c = int(n_c)
        self.y_t = int(y_t)
        self.y_c = int(y_c)
        self.smoothing = float(smoothing)
        self._freeze()

    @property
    def n(self) -> int:
        """Return the number of rows in the node."""
        return self.n_t + self.n_c

    @property
    def p_t(self) -> float:
        """Return the smoothed treated outcome rate."""
        return smoothed_rate(self.y_t, self.n_t, self.smoothing)

    @property
    def p_c(self) -> float:
        """Return the smoothed control outcome rate."""
        return smoothed_rate(self.y_c, self.n_c, self.smoothing)

    @property
    def uplift(self) -> float:
        """Return the smoothed treated minus control outcome rate."""
        return self.p_t - self.p_c

    def __add__(self, other: "NodeStats") -> "NodeStats":
        """Return the statistics of the union of two nodes."""
        return NodeStats(
            n_t=self.n_t + other.n_t,
            n_c=self.n_c + other.n_c,
            y_t=self.y_t + other.y_t,
            y_c=self.y_c + other.y_c,
            smoothing=self.smoothing,
        )


def split_gain_arrays(
    parent: np.ndarray,
    left: np.ndarray,
    kind: Divergence,
    smoothing: float,
) -> np.ndarray:
    """
    Return the gain of candidate splits given cumulative left-child counts.

    Args:
        parent: The counts `(n_t, n_c, y_t, y_c)` of the parent node.
        left: An array of shape (m, 4) with the same counts for each candidate's
            left child; the right child is the difference to the parent.
        kind: The divergence.
        smoothing: The pseudo-count.

    """
    left = np.asarray(left, dtype=float)
    right = np.asarray(parent, dtype=float) - left
    parent = np.asarray(parent, dtype=float)

    def _divergence(counts: np.ndarray) -> np.ndarray:
        p_t = smoothed_rate(counts[..., 2], counts[..., 0], smoothing)
        p_c = smoothed_rate(counts[..., 3], counts[..., 1], smoothing)
        return divergence(p_t, p_c, kind)

    n_parent = parent[0] + parent[1]
    weight_left = (left[:, 0] + left[:, 1]) / n_parent
    weight_right = (right[:, 0] + right[:, 1]) / n_parent
    return (
        weight_left * _divergence(left)
        + weight_right * _divergence(right)
        - _divergence(parent)
    )


def split_gain(
    parent: NodeStats,
    left: NodeStats,
    right: NodeStats,
    kind: Divergence = Divergence.KL,
) -> float:
    """
    Return the divergence gain of splitting `parent` into `left` and `right`.

    The gain is the size-weighted divergence of the children minus the divergence
    of the parent, using the parent's smoothing throughout.

    Raises:
        DataError: If the children do not add up to the parent.

    """
    counts = (parent.n_t, parent.n_c, parent.y_t, parent.y_c)
    left_counts = (left.n_t, left.n_c, left.y_t, left.y_c)
    right_counts = (right.n_t, right.n_c, right.y_t, right.y_c)
    if tuple(a + b for a, b in zip(left_counts, right_counts)) != counts:
        raise DataError("The child node counts do not add up to the parent's.")
    return float(
        split_gain_arrays(
            np.array(counts),
            np.array([left_counts]),
            Divergence(kind),
            parent.smoothing,
        )[0]
    )

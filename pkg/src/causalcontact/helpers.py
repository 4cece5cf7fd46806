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


"""Define general helper functions."""


import hashlib
import json
from pathlib import Path
from typing import Any, List, Union

import numpy as np
from depinfo import print_dependencies


__all__ = (
    "show_versions",
    "derive_seed",
    "derive_seeds",
    "file_sha256",
    "stable_hash",
)


def show_versions() -> None:
    """Print dependency information."""
    print_dependencies("causalcontact")


def derive_seed(seed: int, label: str) -> int:
    """
    Derive a child seed from a master seed and a stable label.

    The derivation depends only on the master seed and the label text, never on
    call order, so that adding a step to a pipeline does not change the random
    streams of the other steps.

    Args:
        seed (int): The master seed.
        label (str): A stable name for the consumer, e.g. `'forest'`.

    Returns:
        int: A non-negative 63-bit seed.

    """
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    entropy = [int(seed)] + [
        int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)
    ]
    state = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1]))


def derive_seeds(seed: int, count: int) -> List[int]:
    """
    Derive `count` child seeds from a master seed by index.

    The i-th seed depends only on the master seed and i, so work items can be
    scheduled on any number of workers without changing their results.

    """
    children = np.random.SeedSequence(int(seed)).spawn(count)
    return [
        int(child.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
        for child in children
    ]


def file_sha256(path: Union[str, Path]) -> str:
    """Return the hex SHA-256 digest of a file's contents."""
    digest = hashlib.sha256()
    with Path(path).open("rb") as handle:
        for block in iter(lambda: handle.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def stable_hash(obj: Any) -> str:
    """Return the hex SHA-256 digest of a JSON-serializable object."""
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()

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


"""Provide a common abstract base class for domain objects."""


from abc import ABC
from typing import Any, Tuple


__all__ = ("AbstractBase",)


class AbstractBase(ABC):
    """
    Define common business logic through an abstract base class.

    Domain objects (datasets, fitted models, reports) derive from this class. They
    are frozen once construction is complete so that they can be shared read-only
    between parallel workers.

    """

    _repr_attributes: Tuple[str, ...] = ()

    def __init__(self, **kwargs):
        """
        Initialize an abstract base class.

        The AbstractBase class is designed to be the singular root of the domain
        class hierarchy and acts as a guard against unknown keyword arguments. Any
        keyword arguments not consumed in the hierarchy above cause a `TypeError`.

        """
        if kwargs:
            phrase = (
                "unexpected keyword arguments"
                if len(kwargs) > 1
                else "an unexpected keyword argument"
            )
            message = "\n    ".join(f"{key}={value}" for key, value in kwargs.items())
            raise TypeError(
                f"{type(self).__name__}.__init__() got {phrase}:\n    {message}"
            )
        super().__init__()

    def _freeze(self) -> None:
        """Prevent any further attribute assignment on this instance."""
        object.__setattr__(self, "_frozen", True)

    def __setattr__(self, name: str, value: Any) -> None:
        """Set an attribute unless the instance has been frozen."""
        if getattr(self, "_frozen", False):
            raise AttributeError(
                f"{type(self).__name__} is immutable; cannot set '{name}'."
            )
        super().__setattr__(name, value)

    def __repr__(self) -> str:
        """Return a string representation of this instance."""
        if not self._repr_attributes:
            return f"{type(self).__name__}({id(self)})"
        fields = ", ".join(
            f"{name}={getattr(self, name)!r}" for name in self._repr_attributes
        )
        return f"{type(self).__name__}({fields})"

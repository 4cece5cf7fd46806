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


"""Ensure the expected behaviour of the abstract base class."""


import pytest

from causalcontact.abstract_base import AbstractBase


class ConcreteBase(AbstractBase):
    """Implement a concrete class for testing purposes."""

    _repr_attributes = ("value",)

    def __init__(self, *, value: int = 1, **kwargs):
        """Initialize and freeze the instance."""
        super().__init__(**kwargs)
        self.value = value
        self._freeze()


def test_base_init():
    """Expect proper initialization from arguments."""
    assert ConcreteBase(value=3).value == 3


@pytest.mark.raises(exception=TypeError, message="unexpected keyword argument")
def test_unknown_keyword():
    """Expect that unknown keyword arguments are rejected."""
    ConcreteBase(colour="red")


@pytest.mark.raises(exception=AttributeError, message="ConcreteBase is immutable")
def test_frozen():
    """Expect that a frozen instance rejects attribute assignment."""
    ConcreteBase().value = 2


def test_repr():
    """Expect the representation to show the declared attributes."""
    assert repr(ConcreteBase(value=5)) == "ConcreteBase(value=5)"


def test_set_collection():
    """Expect that a concrete class can be collected in a set."""
    assert len({ConcreteBase(), ConcreteBase(), ConcreteBase()}) == 3

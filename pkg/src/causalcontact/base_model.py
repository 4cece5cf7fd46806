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


"""Provide a customized base model for all serialized documents."""


import gzip
import json
import logging
from pathlib import Path
from typing import Optional, Type, TypeVar, Union

from pydantic import BaseModel as BaseModel_
from pydantic import Field, ValidationError

from .exceptions import DocumentError, DocumentVersionError


__all__ = ("BaseModel", "DocumentModel", "FORMAT_VERSION")


logger = logging.getLogger(__name__)


FORMAT_VERSION = 1

GZIP_MAGIC = b"\x1f\x8b"

DocumentT = TypeVar("DocumentT", bound="DocumentModel")


class BaseModel(BaseModel_):
    """Define a customized base model."""

    class Config:
        """Define default configuration options for all models."""

        anystr_strip_whitespace = True
        allow_population_by_field_name = True
        orm_mode = True
        extra = "forbid"

    def dict(
        self,
        *,
        by_alias: bool = True,
        exclude_none: bool = True,
        **kwargs,
    ) -> dict:
        """
        Serialize the model using custom settings.

        Args:
            by_alias (bool, optional): Whether to create serialized field names by
                their alias (default `True`).
            exclude_none (bool, optional): Whether to exclude keys with `None` values
                entirely (default `True`).
            **kwargs: Further keyword arguments are passed to the pydantic super method
                `.dict`.

        Returns:
            dict: The serialized model as a (nested) dictionary.

        See Also:
            pydantic.BaseModel.dict

        """
        return super().dict(by_alias=by_alias, exclude_none=exclude_none, **kwargs)

    def json(
        self, *, by_alias: bool = True, exclude_none: bool = True, **kwargs
    ) -> str:
        """
        Serialize the model using custom settings.

        Unlike the pydantic default, fields equal to their default are kept so that
        every document is complete on its own.

        See Also:
            pydantic.BaseModel.json

        """
        return super().json(by_alias=by_alias, exclude_none=exclude_none, **kwargs)


class DocumentModel(BaseModel):
    """
    Define a versioned document that can be written to and read from disk.

    Attributes:
        format_version (int): The document format version; documents written by a
            newer release are rejected.

    """

    format_version: int = Field(..., alias="formatVersion", ge=1)

    @classmethod
    def loads(cls: Type[DocumentT], text: Union[str, bytes]) -> DocumentT:
        """Parse a document from a JSON string, checking its format version."""
        try:
            raw = json.loads(text)
        except ValueError as error:
            raise DocumentError(
                f"Corrupted or truncated {cls.__name__} document: {error}"
            ) from error
        version = raw.get("formatVersion") if isinstance(raw, dict) else None
        if isinstance(version, int) and version > FORMAT_VERSION:
            raise DocumentVersionError(
                f"{cls.__name__} document has format version {version} but this "
                f"release reads up to version {FORMAT_VERSION}."
            )
        try:
            return cls.parse_obj(raw)
        except ValidationError as error:
            raise DocumentError(
                f"Invalid {cls.__name__} document: {error}"
            ) from error

    @classmethod
    def load(cls: Type[DocumentT], filename: Union[str, Path]) -> DocumentT:
        """Load a document from a JSON file (which may optionally be gzipped)."""
        content = Path(filename).read_bytes()
        if content[:2] == GZIP_MAGIC:
            try:
                content = gzip.decompress(content)
            except (OSError, EOFError) as error:
                raise DocumentError(
                    f"Corrupted or truncated compressed document '{filename}'."
                ) from error
        return cls.loads(content)

    def dump(self, filename: Union[str, Path], *, indent: Optional[int] = None):
        """
        Save the document as JSON, gzipped when the filename ends with `.gz`.

        Compressed output carries no timestamp so that equal documents produce
        byte-identical files.

        Args:
            filename: The file to write to.
            indent: If specified then pretty-print the JSON with the given indent.

        """
        filename = Path(filename)
        content = self.json(indent=indent).encode("utf-8")
        if filename.suffix == ".gz":
            content = gzip.compress(content, mtime=0)
        filename.write_bytes(content)
        logger.debug("Wrote %s to '%s'.", type(self).__name__, filename)

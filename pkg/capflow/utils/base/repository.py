import math
from abc import abstractmethod
from pathlib import Path
from typing import Any, Generic, TypeVar

import numpy as np
import orjson
from pydantic import BaseModel, ValidationError

from capflow.config import logger
from capflow.utils.cli_utils.exception import InputValidationException

ModelType = TypeVar("ModelType")


def jsonable(obj: Any) -> Any:
    """Convert models, arrays and non-finite floats into plain JSON values."""
    if isinstance(obj, BaseModel):
        return jsonable(obj.model_dump())
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return jsonable(obj.item())
    if isinstance(obj, dict):
        return {str(key): jsonable(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(value) for value in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        if math.isnan(obj):
            return "nan"
        return "inf" if obj > 0 else "-inf"
    return obj


def orjson_serializer(obj: Any) -> bytes:
    return orjson.dumps(
        jsonable(obj),
        option=orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS,
    )


def write_document(path: str | Path, document: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(orjson_serializer(document) + b"\n")
    return path


class FileRepositoryBase(Generic[ModelType]):
    """Load and save one kind of value as a JSON document on disk.

    Subclasses translate between the value and its document; every parse or
    validation failure surfaces as :class:`InputValidationException`.
    """

    @property
    @abstractmethod
    def name(self) -> str:
        """Human readable name of the stored value, used in error messages."""
        ...

    @abstractmethod
    def to_document(self, obj: ModelType) -> dict[str, Any]: ...

    @abstractmethod
    def from_document(self, document: dict[str, Any]) -> ModelType: ...

    def get(self, path: str | Path) -> ModelType:
        """Read a document from ``path``.

        Raises:
            InputValidationException: If the file is missing, is not JSON or
                does not describe a valid value.
        """
        path = Path(path)
        try:
            document = orjson.loads(path.read_bytes())
        except OSError as e:
            raise InputValidationException(f"{self.name} file {path} cannot be read: {e}") from e
        except orjson.JSONDecodeError as e:
            raise InputValidationException(
                f"{self.name} file {path} is not valid JSON: {e}"
            ) from e
        if not isinstance(document, dict):
            raise InputValidationException(f"{self.name} file {path} must hold a JSON object")
        try:
            return self.from_document(document)
        except (ValidationError, ValueError, KeyError, TypeError) as e:
            raise InputValidationException(f"{self.name} file {path} is invalid: {e}") from e

    def save_object(self, obj: ModelType, path: str | Path, **metadata: Any) -> Path:
        document = self.to_document(obj)
        if metadata:
            document["metadata"] = metadata
        written = write_document(path, document)
        logger.info(f"Wrote {self.name}", extra={"path": str(written)})
        return written

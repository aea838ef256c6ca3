from enum import Enum
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from capflow import __version__


class SchemaBase(BaseModel):
    model_config = ConfigDict(frozen=True)


class ArraySchemaBase(SchemaBase):
    """Immutable schema that may carry numpy arrays."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class OutputFormat(str, Enum):
    json = "json"
    csv = "csv"


class RunConfig(SchemaBase):
    seed: int = Field(0, ge=0, lt=2**64)
    partition_count: int = Field(ge=1)
    output: Path | None = None
    format: OutputFormat = OutputFormat.json

    def output_path(self, default: str, suffix: str | None = None) -> Path:
        path = self.output or Path(default)
        return path.with_suffix(suffix) if suffix else path

    def metadata(self, command: str, flags: dict[str, Any]) -> dict[str, Any]:
        """Provenance embedded in every output file."""
        return {
            "tool": "capflow",
            "version": __version__,
            "command": command,
            "flags": {key: _plain(value) for key, value in sorted(flags.items())},
            "seed": self.seed,
            "partition_count": self.partition_count,
        }


def _plain(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    return value

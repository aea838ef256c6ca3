from __future__ import annotations

from typing import Any

import numpy as np
from pydantic import model_validator

from capflow.utils.base.schema import ArraySchemaBase
from capflow.utils.cli_utils.exception import DegenerateTriple, DimensionMismatch


def as_point(coords: Any, d: int | None = None) -> np.ndarray:
    """Return ``coords`` as a finite float64 vector of dimension ``d`` (>= 2)."""
    point = np.asarray(coords, dtype=float)
    if point.ndim != 1 or point.shape[0] < 2:
        raise DimensionMismatch(f"a point needs at least 2 coordinates, got shape {point.shape}")
    if d is not None and point.shape[0] != d:
        raise DimensionMismatch(f"expected a point in R^{d}, got R^{point.shape[0]}")
    if not np.all(np.isfinite(point)):
        raise ValueError("point coordinates must be finite")
    return point


class Triple(ArraySchemaBase):
    """An ordered triple of points sharing one ambient dimension."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    @model_validator(mode="before")
    @classmethod
    def coerce_points(cls, data: Any) -> Any:
        if isinstance(data, dict):
            x = as_point(data["x"])
            d = x.shape[0]
            return {"x": x, "y": as_point(data["y"], d), "z": as_point(data["z"], d)}
        return data

    @classmethod
    def of(cls, x: Any, y: Any, z: Any) -> Triple:
        return cls(x=x, y=y, z=z)

    @property
    def d(self) -> int:
        return int(self.x.shape[0])

    @property
    def a(self) -> np.ndarray:
        return self.y - self.x

    @property
    def b(self) -> np.ndarray:
        return self.z - self.y

    def points(self) -> np.ndarray:
        return np.stack([self.x, self.y, self.z])

    def is_distinct(self) -> bool:
        return not (
            np.array_equal(self.x, self.y)
            or np.array_equal(self.y, self.z)
            or np.array_equal(self.x, self.z)
        )

    def require_distinct(self) -> Triple:
        if not self.is_distinct():
            raise DegenerateTriple("triple has coincident points")
        return self

    def map(self, fn) -> Triple:
        return Triple(x=fn(self.x), y=fn(self.y), z=fn(self.z))

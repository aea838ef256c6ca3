from __future__ import annotations

import math
from enum import Enum

import numpy as np
from pydantic import Field, model_validator

from capflow.core.measures.schema import DiscreteMeasure
from capflow.utils.base.schema import SchemaBase
from capflow.utils.cli_utils.exception import DimensionMismatch


class SetKind(str, Enum):
    cantor4 = "cantor4"
    segment = "segment"
    circle = "circle"
    lipschitz_graph = "lipschitz_graph"
    custom = "custom"


class Profile(str, Enum):
    tent = "tent"
    sine = "sine"


class WeightConvention(str, Enum):
    probability = "probability"
    length = "length"
    uniform = "uniform"


class Similarity(SchemaBase):
    """``x -> scale * R(rotation) x + translation``; the rotation acts on the first two axes."""

    scale: float = Field(1.0, gt=0.0)
    rotation: float = 0.0
    translation: tuple[float, ...] = ()

    def apply(self, points: np.ndarray) -> np.ndarray:
        d = points.shape[1]
        if len(self.translation) > d:
            raise DimensionMismatch(
                f"translation has {len(self.translation)} coordinates, points have {d}"
            )
        out = self.scale * points
        if self.rotation:
            c, s = math.cos(self.rotation), math.sin(self.rotation)
            first, second = out[:, 0].copy(), out[:, 1].copy()
            out[:, 0] = c * first - s * second
            out[:, 1] = s * first + c * second
        shift = np.zeros(d)
        shift[: len(self.translation)] = self.translation
        return out + shift


class SetSpec(SchemaBase):
    kind: SetKind
    generation: int = Field(0, ge=0)
    ratio: float = Field(0.25, gt=0.0, le=0.5)
    n_samples: int = Field(64, ge=2)
    length: float = Field(1.0, gt=0.0)
    radius: float = Field(1.0, gt=0.0)
    profile: Profile = Profile.tent
    slope: float = Field(0.5, ge=0.0)
    amplitude: float = Field(0.5, ge=0.0)
    frequency: int = Field(1, ge=1)
    dimension: int = Field(2, ge=2)
    transform: Similarity = Similarity()

    @property
    def label(self) -> str:
        if self.kind is SetKind.cantor4:
            return f"cantor4-g{self.generation}-r{self.ratio:g}"
        return f"{self.kind.value}-n{self.n_samples}"

    @property
    def resolution(self) -> int:
        """Generation for Cantor sets, sample count for curves."""
        return self.generation if self.kind is SetKind.cantor4 else self.n_samples


class PointCloud(DiscreteMeasure):
    """A generated test set: atoms are the sample points, masses their weights."""

    convention: WeightConvention = WeightConvention.uniform
    provenance: SetSpec | None = None

    @model_validator(mode="after")
    def check_provenance(self) -> PointCloud:
        if self.provenance is not None and self.provenance.dimension != self.d:
            raise ValueError(
                f"provenance describes R^{self.provenance.dimension}, points live in R^{self.d}"
            )
        return self

    @property
    def points(self) -> np.ndarray:
        return self.atoms

    @property
    def weights(self) -> np.ndarray:
        return self.masses

    @property
    def label(self) -> str:
        return self.provenance.label if self.provenance is not None else "custom"

    def as_measure(self) -> DiscreteMeasure:
        return DiscreteMeasure(d=self.d, atoms=self.atoms, masses=self.masses)

from __future__ import annotations

import math
from typing import Any

import numpy as np
from pydantic import Field, model_validator

from capflow.core.kernels.service import riesz_exponent
from capflow.utils.base.schema import ArraySchemaBase, SchemaBase


class DiscreteMeasure(ArraySchemaBase):
    """Finitely many pairwise distinct atoms in ``R^d`` with nonnegative masses."""

    d: int = Field(ge=2)
    atoms: np.ndarray
    masses: np.ndarray

    @model_validator(mode="before")
    @classmethod
    def coerce_arrays(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        masses = np.array(data.get("masses", []), dtype=float).reshape(-1)
        d = data.get("d")
        atoms = np.array(data.get("atoms", []), dtype=float)
        if atoms.size == 0:
            if d is None:
                raise ValueError("an empty measure needs an explicit dimension")
            atoms = atoms.reshape(0, int(d))
        if atoms.ndim != 2:
            raise ValueError(f"atoms must be a list of points, got shape {atoms.shape}")
        d = atoms.shape[1] if d is None else d
        return {**data, "d": d, "atoms": atoms, "masses": masses}

    @model_validator(mode="after")
    def check_invariants(self) -> DiscreteMeasure:
        if self.atoms.shape[1] != self.d:
            raise ValueError(f"atoms live in R^{self.atoms.shape[1]}, expected R^{self.d}")
        if self.masses.shape[0] != self.atoms.shape[0]:
            raise ValueError("atoms and masses must have the same length")
        if not (np.all(np.isfinite(self.atoms)) and np.all(np.isfinite(self.masses))):
            raise ValueError("atoms and masses must be finite")
        if np.any(self.masses < 0.0):
            raise ValueError("masses must be nonnegative")
        if np.unique(self.atoms, axis=0).shape[0] != self.atoms.shape[0]:
            raise ValueError("atoms must be pairwise distinct")
        self.atoms.setflags(write=False)
        self.masses.setflags(write=False)
        return self

    @classmethod
    def from_points(cls, atoms: Any, masses: Any | None = None) -> DiscreteMeasure:
        atoms = np.asarray(atoms, dtype=float)
        if masses is None:
            masses = np.ones(atoms.shape[0])
        return cls(d=atoms.shape[1], atoms=atoms, masses=masses)

    @property
    def size(self) -> int:
        return int(self.atoms.shape[0])

    @property
    def total_mass(self) -> float:
        return math.fsum(self.masses)

    def with_masses(self, masses: Any) -> DiscreteMeasure:
        return DiscreteMeasure(d=self.d, atoms=self.atoms.copy(), masses=masses)

    def restrict(self, center: Any, radius: float) -> DiscreteMeasure:
        """The measure restricted to the closed ball ``B(center, radius)``."""
        center = np.asarray(center, dtype=float)
        inside = np.linalg.norm(self.atoms - center, axis=1) <= radius
        return DiscreteMeasure(d=self.d, atoms=self.atoms[inside], masses=self.masses[inside])

    def transformed(self, fn) -> DiscreteMeasure:
        return DiscreteMeasure(d=self.d, atoms=fn(self.atoms.copy()), masses=self.masses.copy())

    def dilated(self, factor: float) -> DiscreteMeasure:
        return self.transformed(lambda atoms: atoms * factor)


class WolffParams(SchemaBase):
    """Exponents of the Wolff potential ``int (mu(B(x,r)) / r^(d-sp))^(q-1) dr/r``."""

    s: float = Field(gt=0.0)
    p: float = Field(gt=1.0)
    dimension: int = Field(2, ge=1)

    @model_validator(mode="after")
    def check_range(self) -> WolffParams:
        if not 0.0 < self.s * self.p <= self.dimension:
            raise ValueError(f"s*p must lie in (0, {self.dimension}], got {self.s * self.p}")
        return self

    @classmethod
    def for_alpha(cls, alpha: float, d: int = 2) -> WolffParams:
        """Exponents ``s = 2(d - alpha)/3``, ``p = 3/2`` matched to the kernel capacity."""
        return cls(s=riesz_exponent(alpha, d), p=1.5, dimension=d)

    @property
    def q(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def gamma(self) -> float:
        return self.dimension - self.s * self.p


class LinearGrowthReport(SchemaBase):
    n: int
    radii: list[float]
    ratios: list[float]
    max_ratio: float

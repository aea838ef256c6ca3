from __future__ import annotations

import math
from enum import Enum

import numpy as np
from pydantic import Field

from capflow.utils.base.schema import ArraySchemaBase, SchemaBase

LP_SUCCESS = frozenset({"optimal", "rescaled"})
OPTIMIZER_SUCCESS = frozenset({"converged", "stalled", "max_steps"})


class Method(str, Enum):
    lp = "lp"
    wolff_energy = "wolff_energy"
    sym_energy = "sym_energy"


class LPConfig(SchemaBase):
    """Discretisation and tolerances of the linear program.

    The grid spacing is ``h`` when given, otherwise ``diameter / grid_resolution``
    so that the grid dilates with the support.
    """

    h: float | None = Field(None, gt=0.0)
    grid_resolution: int = Field(24, ge=1)
    separation_factor: float = Field(0.5, gt=0.0)
    pad_factor: float = Field(1.0, ge=0.0)
    feasibility_tol: float = Field(1e-7, gt=0.0)
    optimality_tol: float = Field(1e-7, gt=0.0)
    max_iterations: int = Field(200, ge=1)
    max_rounds: int = Field(60, ge=1)

    def spacing(self, extent: float) -> float:
        return self.h if self.h is not None else extent / self.grid_resolution


class OptimizerConfig(SchemaBase):
    steps: int = Field(200, ge=1)
    step_size: float = Field(0.5, gt=0.0)
    rtol: float = Field(1e-6, gt=0.0)
    restarts: int = Field(4, ge=0)
    seed: int = 0


class Diagnostics(SchemaBase):
    status: str
    iterations: int = 0
    constraints: int = 0
    working_constraints: int = 0
    rounds: int = 0
    max_violation: float = 0.0
    duality_gap: float | None = None
    energy: float | None = None
    starts: int = 0
    grid_spacing: float | None = None
    separation: float | None = None


class CapacityEstimate(ArraySchemaBase):
    value: float = Field(ge=0.0)
    method: Method
    diagnostics: Diagnostics
    masses: np.ndarray

    @property
    def success(self) -> bool:
        allowed = LP_SUCCESS if self.method is Method.lp else OPTIMIZER_SUCCESS
        return self.diagnostics.status in allowed and math.isfinite(self.value)


class ExperimentRow(SchemaBase):
    set: str
    generation: int
    alpha: float
    n: int
    gamma_lp: float
    gamma_energy: float
    riesz_wolff: float
    ratio_lp_wolff: float
    ratio_energy_wolff: float
    status: str
    diagnostics: dict[str, Diagnostics] = {}

    @property
    def success(self) -> bool:
        return self.status == "ok"


class RectifiabilityRow(SchemaBase):
    set: str
    generation: int
    n: int
    points: int
    total_mass: float
    triple_energy: float
    normalized_triple_energy: float
    curvature_energy: float
    normalized_curvature_energy: float

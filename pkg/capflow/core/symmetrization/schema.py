from pydantic import Field

from capflow.utils.base.schema import SchemaBase


class PermReport(SchemaBase):
    """Permutation value of one triple with the ratios of its two-sided bounds.

    ``lower_ratio`` is ``p^i L^(2 alpha + 2n) / M_i^(2n)`` (``inf`` when
    ``M_i = 0``), ``upper_ratio`` is ``p^i L^(2 alpha)``, ``total_ratio`` is
    ``p L^(2 alpha)`` and ``curvature_ratio`` is ``sum_{i != j} p^i / c^2``,
    only defined for ``alpha = 1`` and non-collinear triples.
    """

    axis: int
    value: float
    total: float
    lower_ratio: float
    upper_ratio: float
    total_ratio: float
    curvature_ratio: float | None = None
    collinear: bool


class Envelope(SchemaBase):
    minimum: float
    maximum: float
    count: int


class PermCheckReport(SchemaBase):
    alpha: float
    n: int
    d: int
    samples: int
    seed: int
    theta0: float
    hyperplane_axis: int
    lower_ratio: list[Envelope]
    upper_ratio: list[Envelope]
    total_ratio: Envelope
    negative_fraction: list[float]
    sign_violations: int
    vanishing_max: float | None = None
    curvature_floor: float | None = None
    curvature_samples: int = 0
    drift: dict[str, float] = Field(default_factory=dict)

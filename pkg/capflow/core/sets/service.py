import math

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from capflow.config import app_settings, logger
from capflow.core.sets.schema import (
    PointCloud,
    Profile,
    SetKind,
    SetSpec,
    Similarity,
    WeightConvention,
)
from capflow.utils.cli_utils.exception import (
    ParameterDomainError,
    ResourceGuardException,
    UsageException,
)

# Parameter nodes per curve sample used to measure arclength of graphs.
GRAPH_OVERSAMPLING = 64

CORNERS = np.array([[-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0], [1.0, 1.0]])


def _guard_points(count: int) -> None:
    if count > app_settings.max_points:
        raise ResourceGuardException(
            f"{count} points exceed the limit of {app_settings.max_points} "
            "(raise CAPFLOW_MAX_POINTS to allow more)"
        )


def _embed(points: np.ndarray, dimension: int) -> np.ndarray:
    if dimension == points.shape[1]:
        return points
    padded = np.zeros((points.shape[0], dimension))
    padded[:, : points.shape[1]] = points
    return padded


def _cantor_centers(generation: int, ratio: float) -> np.ndarray:
    centers = np.array([[0.5, 0.5]])
    side = 1.0
    for _ in range(generation):
        offset = 0.5 * (side - ratio * side)
        centers = (centers[:, None, :] + offset * CORNERS[None, :, :]).reshape(-1, 2)
        side *= ratio
    return centers


def _graph_profile(spec: SetSpec):
    if spec.profile is Profile.tent:
        return lambda t: spec.slope * np.abs(t - 0.5)
    omega = 2.0 * math.pi * spec.frequency
    return lambda t: spec.amplitude * np.sin(omega * t) / omega


def _graph_samples(spec: SetSpec) -> tuple[np.ndarray, float]:
    """Arclength-equispaced points on the graph of the profile over ``[0, 1]``."""
    profile = _graph_profile(spec)
    # an even node count keeps the tent's kink at t = 1/2 on the grid
    nodes = 2 * GRAPH_OVERSAMPLING * spec.n_samples
    t = np.linspace(0.0, 1.0, nodes + 1)
    arc = np.concatenate([[0.0], np.cumsum(np.hypot(np.diff(t), np.diff(profile(t))))])
    length = float(arc[-1])
    targets = np.linspace(0.0, length, spec.n_samples)
    t_samples = np.interp(targets, arc, t)
    return np.column_stack([t_samples, profile(t_samples)]), length


def _curve_samples(spec: SetSpec) -> tuple[np.ndarray, float]:
    n = spec.n_samples
    if spec.kind is SetKind.segment:
        t = np.arange(n) / (n - 1)
        return np.column_stack([spec.length * t, np.zeros(n)]), spec.length
    if spec.kind is SetKind.circle:
        theta = 2.0 * math.pi * np.arange(n) / n
        points = spec.radius * np.column_stack([np.cos(theta), np.sin(theta)])
        return points, 2.0 * math.pi * spec.radius
    return _graph_samples(spec)


def generate(spec: SetSpec) -> PointCloud:
    """Build the point cloud a :class:`SetSpec` describes.

    Cantor clouds carry probability weights; curve clouds carry arclength
    weights ``length / N`` measured after the similarity is applied.
    """
    if spec.kind is SetKind.custom:
        raise UsageException("custom sets are read from a file, not generated")
    if spec.kind is SetKind.cantor4:
        _guard_points(4**spec.generation)
        points = _cantor_centers(spec.generation, spec.ratio)
        weights = np.full(points.shape[0], 4.0 ** (-spec.generation))
        convention = WeightConvention.probability
    else:
        _guard_points(spec.n_samples)
        points, length = _curve_samples(spec)
        weights = np.full(points.shape[0], spec.transform.scale * length / spec.n_samples)
        convention = WeightConvention.length
    points = spec.transform.apply(_embed(points, spec.dimension))
    logger.debug("Generated set", extra={"set": spec.label, "points": points.shape[0]})
    return PointCloud(
        d=spec.dimension,
        atoms=points,
        masses=weights,
        convention=convention,
        provenance=spec,
    )


def cantor4(
    generation: int,
    ratio: float = 0.25,
    transform: Similarity | None = None,
    dimension: int = 2,
) -> PointCloud:
    return generate(
        SetSpec(
            kind=SetKind.cantor4,
            generation=generation,
            ratio=ratio,
            transform=transform or Similarity(),
            dimension=dimension,
        )
    )


def sample_curve(
    kind: SetKind | str,
    n: int,
    transform: Similarity | None = None,
    **params,
) -> PointCloud:
    kind = SetKind(kind)
    if kind not in (SetKind.segment, SetKind.circle, SetKind.lipschitz_graph):
        raise ParameterDomainError(f"{kind.value} is not a curve")
    return generate(
        SetSpec(kind=kind, n_samples=n, transform=transform or Similarity(), **params)
    )


def grid_shape(cloud: PointCloud, h: float, pad: float) -> tuple[np.ndarray, np.ndarray]:
    """Lower corner and per-axis node count of the padded bounding-box grid."""
    if h <= 0.0:
        raise ParameterDomainError(f"grid spacing must be positive, got {h}")
    if pad < 0.0:
        raise ParameterDomainError(f"padding must be nonnegative, got {pad}")
    if cloud.size == 0:
        raise ParameterDomainError("cannot build a grid around an empty cloud")
    lower = cloud.atoms.min(axis=0) - pad
    upper = cloud.atoms.max(axis=0) + pad
    counts = np.floor((upper - lower) / h + 1e-9).astype(np.int64) + 1
    return lower, counts


def constraint_grid(cloud: PointCloud, h: float, pad: float, delta: float) -> np.ndarray:
    """Grid nodes of spacing ``h`` over the padded bounding box, at distance ``>= delta``."""
    if delta < 0.0:
        raise ParameterDomainError(f"separation must be nonnegative, got {delta}")
    lower, counts = grid_shape(cloud, h, pad)
    total = math.prod(int(c) for c in counts)
    if total > app_settings.max_grid_points:
        raise ResourceGuardException(
            f"a grid of {total} points exceeds the limit of {app_settings.max_grid_points} "
            "(raise CAPFLOW_MAX_GRID_POINTS or coarsen the grid)"
        )
    axes = [lower[i] + h * np.arange(counts[i]) for i in range(cloud.d)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, cloud.d)
    if delta > 0.0:
        distances, _ = cKDTree(cloud.atoms).query(grid)
        grid = grid[distances >= delta]
    return grid


def diameter(cloud: PointCloud, block: int = 1024) -> float:
    """Largest pairwise distance between cloud points (0 for a single point)."""
    atoms = cloud.atoms
    widest = 0.0
    for lo in range(0, cloud.size, block):
        widest = max(widest, float(cdist(atoms[lo : lo + block], atoms).max()))
    return widest

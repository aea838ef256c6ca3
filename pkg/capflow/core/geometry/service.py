"""Triangle geometry: side lengths, areas, Menger curvature and angles.

Scalar operations take a :class:`Triple`; the ``batch_*`` variants take three
``(m, d)`` arrays and are what the harnesses and energies run on.
"""

import itertools
import math

import numpy as np

from capflow.core.geometry.schema import Triple, as_point
from capflow.utils.cli_utils.exception import (
    AxisOutOfRange,
    DegenerateTriple,
    DimensionMismatch,
    NumericConsistencyError,
)

MELNIKOV_RTOL = 1e-9


def _check_axis(axis: int, d: int) -> int:
    if not 0 <= axis < d:
        raise AxisOutOfRange(f"axis {axis} is outside 0..{d - 1}")
    return axis


def _sides(t: Triple) -> tuple[float, float, float]:
    return (
        float(np.linalg.norm(t.x - t.y)),
        float(np.linalg.norm(t.y - t.z)),
        float(np.linalg.norm(t.x - t.z)),
    )


def largest_side(t: Triple) -> float:
    t.require_distinct()
    return max(_sides(t))


def coordinate_spread(t: Triple, axis: int) -> float:
    _check_axis(axis, t.d)
    xi, yi, zi = t.x[axis], t.y[axis], t.z[axis]
    return float(max(abs(yi - xi), abs(zi - yi), abs(zi - xi)))


def triangle_area(t: Triple) -> float:
    """Area from the Gram form ``sqrt(|a|^2 |b|^2 - (a.b)^2) / 2``."""
    t.require_distinct()
    a, b = t.a, t.b
    gram = float(a @ a) * float(b @ b) - float(a @ b) ** 2
    return 0.5 * math.sqrt(max(gram, 0.0))


def heron_area(t: Triple) -> float:
    """Heron's formula in its cancellation-safe ordering (sides sorted descending)."""
    t.require_distinct()
    p, q, r = sorted(_sides(t), reverse=True)
    product = (p + (q + r)) * (r - (p - q)) * (r + (p - q)) * (p + (q - r))
    return 0.25 * math.sqrt(max(product, 0.0))


def menger_curvature(t: Triple) -> float:
    t.require_distinct()
    p, q, r = _sides(t)
    return 4.0 * triangle_area(t) / (p * q * r)


def melnikov_sum(t: Triple) -> float:
    """Sum over the six orderings of ``1 / ((z2 - z1) * conj(z3 - z1))``.

    Equals the squared Menger curvature of a planar triple.
    """
    if t.d != 2:
        raise DimensionMismatch(f"melnikov_sum is planar, got d={t.d}")
    t.require_distinct()
    zs = [complex(p[0], p[1]) for p in t.points()]
    terms = [
        1.0 / ((zs[j] - zs[i]) * (zs[k] - zs[i]).conjugate())
        for i, j, k in itertools.permutations(range(3))
    ]
    total = sum(terms)
    scale = sum(abs(term) for term in terms)
    if abs(total.imag) > MELNIKOV_RTOL * scale:
        raise NumericConsistencyError(
            f"imaginary residue {total.imag:.3e} is not negligible against {scale:.3e}"
        )
    return total.real


def heron_curvature_squared(t: Triple) -> float:
    """Squared curvature from the side-length product formula.

    The triple is rescaled so that ``|a + b| = 1``, the product formula is
    evaluated there, and the ``1 / |a + b|^2`` scaling is undone.
    """
    t.require_distinct()
    scale = float(np.linalg.norm(t.a + t.b))
    a = float(np.linalg.norm(t.a)) / scale
    b = float(np.linalg.norm(t.b)) / scale
    product = (b + a - 1.0) * (b + 1.0 - a) * (a + 1.0 - b) * (b + 1.0 + a)
    return max(product, 0.0) / (a * a * b * b) / (scale * scale)


def line_hyperplane_angle(p, q, j: int) -> float:
    """Smallest angle between the line through ``p, q`` and ``{x_j = 0}``."""
    p = as_point(p)
    q = as_point(q, p.shape[0])
    _check_axis(j, p.shape[0])
    if np.array_equal(p, q):
        raise DegenerateTriple("a line needs two distinct points")
    ratio = abs(p[j] - q[j]) / float(np.linalg.norm(p - q))
    return math.asin(min(ratio, 1.0))


def angle_condition(t: Triple, j: int) -> float:
    """Sum of the angles the three sides of ``t`` make with ``{x_j = 0}``."""
    t.require_distinct()
    return (
        line_hyperplane_angle(t.x, t.y, j)
        + line_hyperplane_angle(t.x, t.z, j)
        + line_hyperplane_angle(t.y, t.z, j)
    )


def batch_side_lengths(x: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Side lengths ``|x-y|, |y-z|, |x-z|`` stacked on the last axis."""
    return np.stack(
        [
            np.linalg.norm(x - y, axis=-1),
            np.linalg.norm(y - z, axis=-1),
            np.linalg.norm(x - z, axis=-1),
        ],
        axis=-1,
    )


def batch_largest_side(x: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
    return batch_side_lengths(x, y, z).max(axis=-1)


def batch_coordinate_spread(
    x: np.ndarray, y: np.ndarray, z: np.ndarray, axis: int
) -> np.ndarray:
    xi, yi, zi = x[..., axis], y[..., axis], z[..., axis]
    return np.maximum.reduce([np.abs(yi - xi), np.abs(zi - yi), np.abs(zi - xi)])


def batch_triangle_area(x: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
    a, b = y - x, z - y
    gram = np.einsum("...i,...i", a, a) * np.einsum("...i,...i", b, b)
    gram -= np.einsum("...i,...i", a, b) ** 2
    return 0.5 * np.sqrt(np.maximum(gram, 0.0))


def batch_menger_curvature(x: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
    sides = batch_side_lengths(x, y, z)
    return 4.0 * batch_triangle_area(x, y, z) / sides.prod(axis=-1)


def batch_angle_sum(x: np.ndarray, y: np.ndarray, z: np.ndarray, j: int) -> np.ndarray:
    total = np.zeros(x.shape[:-1])
    for p, q in ((x, y), (x, z), (y, z)):
        diff = p - q
        ratio = np.abs(diff[..., j]) / np.linalg.norm(diff, axis=-1)
        total += np.arcsin(np.minimum(ratio, 1.0))
    return total

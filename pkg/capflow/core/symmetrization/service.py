import numpy as np

from capflow.core.geometry.schema import Triple
from capflow.core.geometry.service import (
    batch_coordinate_spread,
    batch_largest_side,
    batch_menger_curvature,
    largest_side,
    menger_curvature,
)
from capflow.core.kernels.schema import KernelParams
from capflow.core.kernels.service import kernel_field
from capflow.core.symmetrization.schema import PermReport
from capflow.utils.cli_utils.exception import AxisOutOfRange, DimensionMismatch

COLLINEAR_RTOL = 1e-12


def perm_terms(
    params: KernelParams, x: np.ndarray, y: np.ndarray, z: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The three products of the symmetrization, per axis.

    Evaluated in the difference variables ``a = y - x``, ``b = z - y``:
    ``K(a)K(a+b)``, ``-K(a)K(b)`` and ``K(b)K(a+b)``, which by oddness of the
    kernel are the ``x``, ``y`` and ``z`` terms respectively.
    """
    a = y - x
    b = z - y
    ka = kernel_field(params, a)
    kb = kernel_field(params, b)
    kab = kernel_field(params, a + b)
    return ka * kab, -(ka * kb), kb * kab


def batch_perm_components(
    params: KernelParams, x: np.ndarray, y: np.ndarray, z: np.ndarray
) -> np.ndarray:
    first, second, third = perm_terms(params, x, y, z)
    return first + second + third


def _checked(params: KernelParams, t: Triple) -> Triple:
    if t.d != params.d:
        raise DimensionMismatch(f"kernel is set up for d={params.d}, triple has d={t.d}")
    return t.require_distinct()


def perm_component(params: KernelParams, axis: int, t: Triple) -> float:
    _checked(params, t)
    if not 0 <= axis < params.d:
        raise AxisOutOfRange(f"axis {axis} is outside 0..{params.d - 1}")
    return float(batch_perm_components(params, t.x, t.y, t.z)[axis])


def perm_total(params: KernelParams, t: Triple) -> float:
    _checked(params, t)
    return float(batch_perm_components(params, t.x, t.y, t.z).sum())


def bound_report(
    params: KernelParams,
    t: Triple,
    axis: int = 0,
    hyperplane_axis: int | None = None,
) -> PermReport:
    _checked(params, t)
    if not 0 <= axis < params.d:
        raise AxisOutOfRange(f"axis {axis} is outside 0..{params.d - 1}")
    j = params.d - 1 if hyperplane_axis is None else hyperplane_axis
    if not 0 <= j < params.d:
        raise AxisOutOfRange(f"hyperplane axis {j} is outside 0..{params.d - 1}")

    components = batch_perm_components(params, t.x, t.y, t.z)
    value = float(components[axis])
    total = float(components.sum())
    side = largest_side(t)
    spread = float(batch_coordinate_spread(t.x, t.y, t.z, axis))
    lower = (
        value * side ** (2 * params.alpha + 2 * params.n) / spread ** (2 * params.n)
        if spread > 0.0
        else float("inf")
    )
    curvature = menger_curvature(t)
    collinear = curvature * side <= COLLINEAR_RTOL
    curvature_ratio = None
    if params.alpha == 1.0 and not collinear:
        others = float(np.delete(components, j).sum())
        curvature_ratio = others / curvature**2
    return PermReport(
        axis=axis,
        value=value,
        total=total,
        lower_ratio=lower,
        upper_ratio=value * side ** (2 * params.alpha),
        total_ratio=total * side ** (2 * params.alpha),
        curvature_ratio=curvature_ratio,
        collinear=collinear,
    )


def batch_ratios(
    params: KernelParams, x: np.ndarray, y: np.ndarray, z: np.ndarray
) -> dict[str, np.ndarray]:
    """Per-triple bound ratios for ``(m, d)`` batches of triples."""
    first, second, third = perm_terms(params, x, y, z)
    components = first + second + third
    scale = np.maximum.reduce([np.abs(first), np.abs(second), np.abs(third)])
    side = batch_largest_side(x, y, z)[:, None]
    spread = np.stack(
        [batch_coordinate_spread(x, y, z, i) for i in range(params.d)], axis=-1
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        lower = np.where(
            spread > 0.0,
            components * side ** (2 * params.alpha + 2 * params.n) / spread ** (2 * params.n),
            np.inf,
        )
    return {
        "components": components,
        "scale": scale,
        "lower": lower,
        "upper": components * side ** (2 * params.alpha),
        "total": components.sum(axis=-1) * side[:, 0] ** (2 * params.alpha),
        "curvature": batch_menger_curvature(x, y, z),
        "side": side[:, 0],
    }

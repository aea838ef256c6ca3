"""Potentials and energies of discrete measures.

Every energy excludes the diagonal: an atom never interacts with itself, and
a potential evaluated at an atom of the measure sees the measure without that
atom. Balls are closed.
"""

import math
from collections.abc import Iterator, Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from capflow.core.geometry.schema import as_point
from capflow.core.geometry.service import batch_menger_curvature
from capflow.core.kernels.schema import KernelParams
from capflow.core.kernels.service import kernel_field
from capflow.core.measures.schema import DiscreteMeasure, LinearGrowthReport, WolffParams
from capflow.core.symmetrization.service import batch_perm_components
from capflow.utils.cli_utils.exception import DimensionMismatch, ParameterDomainError
from capflow.utils.reduction import partitioned_fsum

BLOCK_ROWS = 256


def _row_blocks(count: int, block: int = BLOCK_ROWS) -> list[tuple[int, int]]:
    return [(lo, min(lo + block, count)) for lo in range(0, count, block)]


def _blockwise_fsum(values: np.ndarray, partitions: int | None = None) -> float:
    blocks = _row_blocks(values.shape[0])
    return partitioned_fsum(
        lambda b: values[blocks[b][0] : blocks[b][1]], len(blocks), partitions
    )


def _check_wolff(wp: WolffParams, d: int | None = None) -> None:
    if d is not None and d != wp.dimension:
        raise DimensionMismatch(
            f"Wolff exponents are set up for d={wp.dimension}, measure has d={d}"
        )
    if wp.gamma <= 0.0:
        raise ParameterDomainError(
            f"the Wolff potential needs s*p < {wp.dimension}, got s*p = {wp.s * wp.p}"
        )


def _check_kernel(mu: DiscreteMeasure, params: KernelParams) -> None:
    if params.d != mu.d:
        raise DimensionMismatch(f"kernel is set up for d={params.d}, measure has d={mu.d}")


def _neighbourhood(mu: DiscreteMeasure, x, exclude_self: bool) -> tuple[np.ndarray, np.ndarray]:
    x = as_point(x, mu.d)
    distances = np.linalg.norm(mu.atoms - x, axis=1)
    masses = mu.masses
    if exclude_self:
        keep = distances > 0.0
        distances, masses = distances[keep], masses[keep]
    order = np.argsort(distances, kind="stable")
    return distances[order], np.cumsum(masses[order])


def ball_mass(mu: DiscreteMeasure, x, r: float) -> float:
    if r < 0.0:
        raise ParameterDomainError(f"radius must be nonnegative, got {r}")
    x = as_point(x, mu.d)
    inside = np.linalg.norm(mu.atoms - x, axis=1) <= r
    return math.fsum(mu.masses[inside])


def maximal_growth(mu: DiscreteMeasure, x, alpha: float, exclude_self: bool = False) -> float:
    """``sup_r mu(B(x, r)) / r^alpha``, attained at one of the atom distances."""
    if not 0.0 < alpha < 2.0:
        raise ParameterDomainError(f"alpha must lie in (0, 2), got {alpha}")
    radii, cumulative = _neighbourhood(mu, x, exclude_self)
    charged = cumulative > 0.0
    if not charged.any():
        return 0.0
    if np.any(charged & (radii == 0.0)):
        return math.inf
    return float(np.max(cumulative[charged] / radii[charged] ** alpha))


def wolff_potential(
    mu: DiscreteMeasure, x, wp: WolffParams, exclude_self: bool = False
) -> float:
    """Closed form of the Wolff potential of an atomic measure.

    Between consecutive atom distances ``r_i <= r < r_{i+1}`` the ball mass is
    the constant cumulative mass ``M_i``, so the radial integral is a sum of
    ``M_i^(q-1) (r_i^-beta - r_{i+1}^-beta) / beta`` with ``beta = gamma (q-1)``.
    """
    _check_wolff(wp, mu.d)
    radii, cumulative = _neighbourhood(mu, x, exclude_self)
    charged = cumulative > 0.0
    if not charged.any():
        return 0.0
    if np.any(charged & (radii == 0.0)):
        return math.inf
    beta = wp.gamma * (wp.q - 1.0)
    following = np.append(radii[1:], np.inf)[charged]
    tails = radii[charged] ** (-beta) - following ** (-beta)
    return math.fsum(cumulative[charged] ** (wp.q - 1.0) * tails) / beta


def cell_radii(atoms: np.ndarray) -> np.ndarray:
    """Half the distance from every atom to its nearest neighbour."""
    if atoms.shape[0] < 2:
        raise ParameterDomainError("cell radii need at least two atoms")
    distances, _ = cKDTree(atoms).query(atoms, k=2)
    return 0.5 * distances[:, 1]


def _sorted_rows(
    atoms: np.ndarray,
    masses: np.ndarray,
    lo: int,
    hi: int,
    self_radii: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Distances from atoms ``lo:hi`` to all atoms, sorted per row.

    Without ``self_radii`` the atom itself is dropped; with them it is seen at
    distance ``self_radii[i]``, as if its mass were spread over that cell.
    """
    block = cdist(atoms[lo:hi], atoms)
    rows = np.arange(hi - lo), np.arange(lo, hi)
    if self_radii is None:
        block[rows] = np.inf
        order = np.argsort(block, axis=1, kind="stable")[:, :-1]
    else:
        block[rows] = self_radii[lo:hi]
        order = np.argsort(block, axis=1, kind="stable")
    radii = np.take_along_axis(block, order, axis=1)
    cumulative = np.cumsum(masses[order], axis=1)
    return block, order, radii, cumulative


def _wolff_rows(
    atoms: np.ndarray,
    masses: np.ndarray,
    wp: WolffParams,
    gradient: bool,
    self_radii: np.ndarray | None = None,
) -> Iterator[tuple[int, int, np.ndarray, np.ndarray | None]]:
    q1 = wp.q - 1.0
    beta = wp.gamma * q1
    count = atoms.shape[0]
    for lo, hi in _row_blocks(count):
        _, order, radii, cumulative = _sorted_rows(atoms, masses, lo, hi, self_radii)
        following = np.concatenate([radii[:, 1:], np.full((hi - lo, 1), np.inf)], axis=1)
        tails = radii ** (-beta) - following ** (-beta)
        charged = cumulative > 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            potential = np.where(charged, cumulative**q1 * tails, 0.0).sum(axis=1) / beta
        cross = None
        if gradient:
            with np.errstate(divide="ignore", invalid="ignore"):
                slope = np.where(
                    charged & (tails > 0.0), q1 * cumulative ** (q1 - 1.0) * tails, 0.0
                ) / beta
            suffix = np.cumsum(slope[:, ::-1], axis=1)[:, ::-1]
            spread = np.zeros((hi - lo, count))
            np.put_along_axis(spread, order, suffix, axis=1)
            cross = masses[lo:hi] @ spread
        yield lo, hi, potential, cross


def wolff_energy_and_gradient(
    atoms: np.ndarray,
    masses: np.ndarray,
    wp: WolffParams,
    self_radii: np.ndarray | None = None,
    partitions: int | None = None,
) -> tuple[float, np.ndarray]:
    """Wolff energy of ``sum_j masses[j] delta_{atoms[j]}`` and its mass gradient.

    ``self_radii`` switches on the self-interaction of every atom, see
    :func:`_sorted_rows`.
    """
    _check_wolff(wp)
    count = atoms.shape[0]
    gradient = np.zeros(count)
    if count < 2 and self_radii is None:
        return 0.0, gradient
    partials = []
    for lo, hi, potential, cross in _wolff_rows(atoms, masses, wp, True, self_radii):
        partials.append(masses[lo:hi] * potential)
        gradient[lo:hi] += potential
        gradient += cross
    return _blockwise_fsum(np.concatenate(partials), partitions), gradient


def wolff_energy(mu: DiscreteMeasure, wp: WolffParams, partitions: int | None = None) -> float:
    _check_wolff(wp, mu.d)
    if mu.size < 2:
        return 0.0
    blocks = list(_wolff_rows(mu.atoms, mu.masses, wp, gradient=False))
    return partitioned_fsum(
        lambda b: mu.masses[blocks[b][0] : blocks[b][1]] * blocks[b][2],
        len(blocks),
        partitions,
    )


def _growth_rows(
    atoms: np.ndarray,
    masses: np.ndarray,
    alpha: float,
    gradient: bool,
    self_radii: np.ndarray | None = None,
) -> Iterator[tuple[int, int, np.ndarray, np.ndarray | None]]:
    count = atoms.shape[0]
    for lo, hi in _row_blocks(count):
        block, _, radii, cumulative = _sorted_rows(atoms, masses, lo, hi, self_radii)
        ratio = cumulative / radii**alpha
        best = np.argmax(ratio, axis=1)
        rows = np.arange(hi - lo)
        growth = ratio[rows, best]
        cross = None
        if gradient:
            radius = radii[rows, best]
            inside = block <= radius[:, None]
            cross = (masses[lo:hi] / radius**alpha) @ inside
        yield lo, hi, growth, cross


def _kernel_rows(params: KernelParams, atoms: np.ndarray, lo: int, hi: int) -> np.ndarray:
    return kernel_field(params, atoms[lo:hi, None, :] - atoms[None, :, :])


def _perm_potentials(
    params: KernelParams, atoms: np.ndarray, masses: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """``T_x = sum_y K(x-y) m_y`` and ``Q_x = sum_y K(x-y)^2 m_y^2`` per axis."""
    count = atoms.shape[0]
    field = np.zeros((count, params.d))
    squares = np.zeros((count, params.d))
    for lo, hi in _row_blocks(count):
        rows = _kernel_rows(params, atoms, lo, hi)
        field[lo:hi] = np.einsum("xyd,y->xd", rows, masses)
        squares[lo:hi] = np.einsum("xyd,y->xd", rows**2, masses**2)
    return field, squares


def perm_energy_and_gradient(
    atoms: np.ndarray,
    masses: np.ndarray,
    params: KernelParams,
    gradient: bool = True,
    partitions: int | None = None,
) -> tuple[float, np.ndarray | None]:
    """Sum of ``p(x, y, z) m_x m_y m_z`` over ordered triples of distinct atoms.

    Each of the three terms of the symmetrization contributes the same amount
    after relabelling, so the triple sum equals
    ``3 sum_x m_x sum_i ((T^i_x)^2 - Q^i_x)`` and costs ``O(N^2)``.
    """
    count = atoms.shape[0]
    if count < 3:
        return 0.0, (np.zeros(count) if gradient else None)
    field, squares = _perm_potentials(params, atoms, masses)
    local = (field**2 - squares).sum(axis=1)
    energy = 3.0 * _blockwise_fsum(masses * local, partitions)
    if not gradient:
        return energy, None
    coupled = np.zeros(count)
    self_coupled = np.zeros(count)
    for lo, hi in _row_blocks(count):
        rows = _kernel_rows(params, atoms, lo, hi)
        coupled += np.einsum("x,xkd,xd->k", masses[lo:hi], rows, field[lo:hi])
        self_coupled += np.einsum("x,xkd->k", masses[lo:hi], rows**2)
    return energy, 3.0 * (local + 2.0 * (coupled - masses * self_coupled))


def sym_energy_and_gradient(
    atoms: np.ndarray,
    masses: np.ndarray,
    params: KernelParams,
    self_radii: np.ndarray | None = None,
    partitions: int | None = None,
) -> tuple[float, np.ndarray]:
    """``E_{alpha,n}`` (growth part plus permutation part) and its mass gradient.

    ``self_radii`` only enters the growth part; the permutation part never
    sees coincident points.
    """
    count = atoms.shape[0]
    gradient = np.zeros(count)
    if count < 2 and self_radii is None:
        return 0.0, gradient
    partials = []
    for lo, hi, growth, cross in _growth_rows(
        atoms, masses, params.alpha, True, self_radii
    ):
        partials.append(masses[lo:hi] * growth)
        gradient[lo:hi] += growth
        gradient += cross
    perm, perm_gradient = perm_energy_and_gradient(
        atoms, masses, params, partitions=partitions
    )
    growth = _blockwise_fsum(np.concatenate(partials), partitions)
    return growth + perm, gradient + perm_gradient


def perm_potential_sq(mu: DiscreteMeasure, x, params: KernelParams) -> float:
    """``p^2(mu)(x)``: double sum of ``p(x, y, z) m_y m_z`` over ordered pairs.

    Atoms coinciding with ``x`` are left out, as is the diagonal ``y = z``.
    """
    _check_kernel(mu, params)
    x = as_point(x, mu.d)
    keep = np.any(mu.atoms != x, axis=1)
    others, weights = mu.atoms[keep], mu.masses[keep]
    count = others.shape[0]
    if count < 2:
        return 0.0

    def pairs_from(i: int) -> np.ndarray:
        tail = others[i + 1 :]
        values = batch_perm_components(params, x[None, :], others[i][None, :], tail)
        return values.sum(axis=1) * weights[i] * weights[i + 1 :]

    return 2.0 * partitioned_fsum(pairs_from, count - 1)


def sym_energy_terms(
    mu: DiscreteMeasure, params: KernelParams, partitions: int | None = None
) -> tuple[float, float]:
    """Growth part ``sum_j m_j M_alpha(mu - x_j)(x_j)`` and permutation part."""
    _check_kernel(mu, params)
    if mu.size < 2:
        return 0.0, 0.0
    rows = _growth_rows(mu.atoms, mu.masses, params.alpha, gradient=False)
    growth = _blockwise_fsum(
        np.concatenate([mu.masses[lo:hi] * values for lo, hi, values, _ in rows]), partitions
    )
    perm, _ = perm_energy_and_gradient(
        mu.atoms, mu.masses, params, gradient=False, partitions=partitions
    )
    return growth, perm


def sym_energy(
    mu: DiscreteMeasure, params: KernelParams, partitions: int | None = None
) -> float:
    growth, perm = sym_energy_terms(mu, params, partitions)
    return growth + perm


def _triple_sum(mu: DiscreteMeasure, per_triple, partitions: int | None) -> float:
    """Sum ``per_triple(i, j, k)`` over ``i < j < k`` times the 6 orderings."""
    count = mu.size
    if count < 3:
        return 0.0

    def from_leading(i: int) -> np.ndarray:
        rest = count - i - 1
        if rest < 2:
            return np.zeros(0)
        jj, kk = np.triu_indices(rest, 1)
        j, k = jj + i + 1, kk + i + 1
        weights = mu.masses[i] * mu.masses[j] * mu.masses[k]
        return 6.0 * per_triple(i, j, k) * weights

    return partitioned_fsum(from_leading, count - 2, partitions)


def triple_perm_energy(mu: DiscreteMeasure, n: int, partitions: int | None = None) -> float:
    """``p_{1,n}(mu)``: the permutation triple energy for ``alpha = 1``.

    Triples are enumerated directly (once per unordered triple), so collinear
    supports cancel term by term.
    """
    params = KernelParams(alpha=1.0, n=n, d=mu.d)
    if mu.size < 3:
        return 0.0
    table = kernel_field(params, mu.atoms[:, None, :] - mu.atoms[None, :, :])

    def per_triple(i: int, j: np.ndarray, k: np.ndarray) -> np.ndarray:
        terms = table[i, j] * table[i, k] + table[j, i] * table[j, k] + table[k, i] * table[k, j]
        return terms.sum(axis=1)

    return _triple_sum(mu, per_triple, partitions)


def curvature_energy(mu: DiscreteMeasure, partitions: int | None = None) -> float:
    """``c^2(mu)``: squared Menger curvature summed over ordered distinct triples."""
    atoms = mu.atoms

    def per_triple(i: int, j: np.ndarray, k: np.ndarray) -> np.ndarray:
        return batch_menger_curvature(atoms[i][None, :], atoms[j], atoms[k]) ** 2

    return _triple_sum(mu, per_triple, partitions)


def linear_growth_check(
    mu: DiscreteMeasure, n: int, balls: Sequence[tuple[Sequence[float], float]]
) -> LinearGrowthReport:
    """``p_{1,n}(mu restricted to B) / diam(B)`` for every ball ``B``."""
    radii, ratios = [], []
    for center, radius in balls:
        if radius <= 0.0:
            raise ParameterDomainError(f"ball radius must be positive, got {radius}")
        restricted = mu.restrict(as_point(center, mu.d), radius)
        ratios.append(triple_perm_energy(restricted, n) / (2.0 * radius))
        radii.append(float(radius))
    return LinearGrowthReport(
        n=n, radii=radii, ratios=ratios, max_ratio=max(ratios, default=0.0)
    )

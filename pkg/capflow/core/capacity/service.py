import math

import numpy as np
from scipy.spatial import cKDTree

from capflow.config import logger
from capflow.core.capacity.lp import solve_packing_lp
from capflow.core.capacity.optimizer import SimplexEnergyOptimizer
from capflow.core.capacity.schema import (
    CapacityEstimate,
    Diagnostics,
    LPConfig,
    Method,
    OptimizerConfig,
)
from capflow.core.kernels.schema import KernelParams
from capflow.core.kernels.service import kernel_field
from capflow.core.measures.schema import WolffParams
from capflow.core.measures.service import (
    cell_radii,
    sym_energy_and_gradient,
    wolff_energy_and_gradient,
)
from capflow.core.sets.schema import PointCloud
from capflow.core.sets.service import constraint_grid, diameter
from capflow.utils.cli_utils.exception import DimensionMismatch, ParameterDomainError

# Grid points nearest to each atom that seed the working set of constraints.
SEED_NEIGHBOURS = 8
# Kernel entries evaluated at once when checking the full grid.
CHUNK_ENTRIES = 1 << 22


def _check_dimension(support: PointCloud, d: int) -> None:
    if support.d != d:
        raise DimensionMismatch(f"parameters are set up for d={d}, support has d={support.d}")


def _grid_chunks(grid: np.ndarray, atoms: np.ndarray):
    step = max(1, CHUNK_ENTRIES // max(1, atoms.shape[0] * atoms.shape[1]))
    for lo in range(0, grid.shape[0], step):
        yield lo, grid[lo : lo + step]


def grid_potential(
    params: KernelParams, grid: np.ndarray, atoms: np.ndarray, masses: np.ndarray
) -> np.ndarray:
    """``K * mu`` at every grid point, shape ``(len(grid), d)``."""
    potential = np.empty((grid.shape[0], atoms.shape[1]))
    for lo, chunk in _grid_chunks(grid, atoms):
        field = kernel_field(params, chunk[:, None, :] - atoms[None, :, :])
        potential[lo : lo + chunk.shape[0]] = np.einsum("kjd,j->kd", field, masses)
    return potential


def _constraint_rows(params: KernelParams, points: np.ndarray, atoms: np.ndarray) -> np.ndarray:
    field = kernel_field(params, points[:, None, :] - atoms[None, :, :])
    return field.transpose(0, 2, 1).reshape(-1, atoms.shape[0])


def _lp_grid(support: PointCloud, cfg: LPConfig) -> tuple[np.ndarray, float, float]:
    extent = diameter(support) or 1.0
    h = cfg.spacing(extent)
    delta = cfg.separation_factor * h
    return constraint_grid(support, h, cfg.pad_factor * extent, delta), h, delta


def gamma_plus_lp(
    support: PointCloud,
    params: KernelParams,
    cfg: LPConfig = LPConfig(),
    grid: np.ndarray | None = None,
) -> CapacityEstimate:
    """Largest total mass on the support whose potential stays in the unit ball.

    The sup-norm constraint is imposed at grid points kept at distance
    ``separation_factor * h`` from the support. Constraints enter the solver
    in rounds, most violated first, until the whole grid is satisfied; the
    masses are finally scaled down to be feasible on every grid point.
    """
    if support.size == 0:
        raise ParameterDomainError("the support must contain at least one point")
    _check_dimension(support, params.d)
    if support.d > 2:
        logger.warning("Capacity in dimension above 2 is experimental", extra={"d": support.d})
    h = delta = None
    if grid is None:
        grid, h, delta = _lp_grid(support, cfg)
    else:
        grid = np.asarray(grid, dtype=float).reshape(-1, support.d)
    atoms = support.atoms
    count = support.size
    if grid.shape[0] == 0:
        logger.warning("Constraint grid is empty, the program is unbounded")
        return CapacityEstimate(
            value=math.inf,
            method=Method.lp,
            masses=np.zeros(count),
            diagnostics=Diagnostics(status="unbounded", grid_spacing=h, separation=delta),
        )

    _, nearest = cKDTree(grid).query(atoms, k=min(SEED_NEIGHBOURS, grid.shape[0]))
    working = np.unique(np.ravel(nearest))
    batch = max(64, count)
    tolerance = 1.0 + cfg.feasibility_tol
    iterations = 0
    status = "max_iterations"
    solution = None
    worst = math.inf
    round_ = 0
    for round_ in range(1, cfg.max_rounds + 1):
        solution = solve_packing_lp(
            _constraint_rows(params, grid[working], atoms),
            feasibility_tol=cfg.feasibility_tol,
            optimality_tol=cfg.optimality_tol,
            max_iterations=cfg.max_iterations,
        )
        iterations += solution.iterations
        violation = np.max(np.abs(grid_potential(params, grid, atoms, solution.x)), axis=1)
        worst = float(violation.max())
        logger.debug(
            "Constraint round finished",
            extra={"round": round_, "working": working.size, "worst": worst},
        )
        if solution.status != "optimal":
            status = solution.status
            break
        if worst <= tolerance:
            status = "optimal"
            break
        candidates = np.setdiff1d(np.flatnonzero(violation > tolerance), working)
        if candidates.size == 0:
            status = "rescaled"
            break
        ranked = candidates[np.argsort(-violation[candidates], kind="stable")]
        working = np.union1d(working, ranked[:batch])

    masses = solution.x if np.all(np.isfinite(solution.x)) else np.zeros(count)
    if not math.isfinite(worst):
        status, masses, worst = "numerical_error", np.zeros(count), 0.0
    scale = max(1.0, worst)
    masses = masses / scale
    value = math.fsum(masses)
    logger.info(
        "Solved capacity program",
        extra={"value": value, "status": status, "rounds": round_, "grid": grid.shape[0]},
    )
    return CapacityEstimate(
        value=value,
        method=Method.lp,
        masses=masses,
        diagnostics=Diagnostics(
            status=status,
            iterations=iterations,
            constraints=grid.shape[0] * support.d,
            working_constraints=working.size * support.d,
            rounds=round_,
            max_violation=max(0.0, worst / scale - 1.0),
            duality_gap=solution.duality_gap,
            grid_spacing=h,
            separation=delta,
        ),
    )


def _optimizer_config(config: OptimizerConfig, opt_steps: int | None) -> OptimizerConfig:
    if opt_steps is None:
        return config
    if opt_steps < 1:
        raise ParameterDomainError(f"the optimizer needs at least one step, got {opt_steps}")
    return config.model_copy(update={"steps": opt_steps})


def _energy_estimate(
    optimizer: SimplexEnergyOptimizer, method: Method, to_value
) -> CapacityEstimate:
    result = optimizer.optimize()
    usable = math.isfinite(result.energy) and result.energy > 0.0
    value = to_value(result.energy) if usable else 0.0
    logger.info(
        "Optimized energy",
        extra={"method": method.value, "value": value, "status": result.status},
    )
    return CapacityEstimate(
        value=value,
        method=method,
        masses=result.masses,
        diagnostics=Diagnostics(
            status=result.status,
            iterations=result.steps,
            energy=result.energy,
            starts=result.starts,
        ),
    )


def riesz_capacity_wolff(
    support: PointCloud,
    wp: WolffParams,
    opt_steps: int | None = None,
    config: OptimizerConfig = OptimizerConfig(),
) -> CapacityEstimate:
    """``sup 1 / E_{s,p}(mu)^(p-1)`` over probability measures on the support.

    Every atom carries its own mass at half the distance to its nearest
    neighbour; without that self-interaction a single atom has zero energy and
    the supremum is infinite.
    """
    if support.size < 2:
        raise ParameterDomainError("the Wolff estimate needs at least two points")
    _check_dimension(support, wp.dimension)
    if wp.gamma <= 0.0:
        raise ParameterDomainError(f"s*p must be below {wp.dimension}, got {wp.s * wp.p}")
    atoms = support.atoms
    radii = cell_radii(atoms)
    optimizer = SimplexEnergyOptimizer(
        lambda m: wolff_energy_and_gradient(atoms, m, wp, radii),
        support.size,
        _optimizer_config(config, opt_steps),
    )
    return _energy_estimate(optimizer, Method.wolff_energy, lambda e: e ** (1.0 - wp.p))


def gamma_plus_energy(
    support: PointCloud,
    params: KernelParams,
    opt_steps: int | None = None,
    config: OptimizerConfig = OptimizerConfig(),
) -> CapacityEstimate:
    """``sup 1 / E_{alpha,n}(mu)`` over probability measures on the support.

    The growth part sees every atom at its cell radius, as in
    :func:`riesz_capacity_wolff`.
    """
    if support.size < 3:
        raise ParameterDomainError("the energy estimate needs at least three points")
    _check_dimension(support, params.d)
    atoms = support.atoms
    radii = cell_radii(atoms)
    optimizer = SimplexEnergyOptimizer(
        lambda m: sym_energy_and_gradient(atoms, m, params, radii),
        support.size,
        _optimizer_config(config, opt_steps),
    )
    return _energy_estimate(optimizer, Method.sym_energy, lambda e: 1.0 / e)

"""Dense primal-dual interior-point method for packing linear programs.

Solves ``max sum(m)`` subject to ``|A m| <= 1`` row-wise and ``m >= 0``,
written as ``min c.x`` with ``G x + s = 1``, ``G = [A; -A]``, ``x, s >= 0``.
Each iteration takes a Mehrotra predictor-corrector step through the normal
equations ``(G^T (Y/S) G + Z/X) dx = rhs``.
"""

import math
from typing import NamedTuple

import numpy as np
from scipy import linalg

from capflow.config import logger

# Fraction of the distance to the boundary taken by every step.
STEP_DAMPING = 0.99


class LPSolution(NamedTuple):
    x: np.ndarray
    status: str
    iterations: int
    duality_gap: float
    primal_residual: float


def _factor(matrix: np.ndarray):
    try:
        factor = linalg.cho_factor(matrix, check_finite=False)
        return lambda rhs: linalg.cho_solve(factor, rhs, check_finite=False)
    except linalg.LinAlgError:
        logger.debug("Normal matrix lost definiteness, falling back to LU")
        lu = linalg.lu_factor(matrix + 1e-12 * np.trace(matrix) * np.eye(matrix.shape[0]))
        return lambda rhs: linalg.lu_solve(lu, rhs, check_finite=False)


def _max_step(v: np.ndarray, dv: np.ndarray) -> float:
    shrinking = dv < 0.0
    if not shrinking.any():
        return 1.0
    return min(1.0, float(np.min(-v[shrinking] / dv[shrinking])))


def solve_packing_lp(
    a: np.ndarray,
    feasibility_tol: float = 1e-7,
    optimality_tol: float = 1e-7,
    max_iterations: int = 200,
) -> LPSolution:
    rows, cols = a.shape
    g = np.vstack([a, -a])
    h = np.ones(2 * rows)
    c = -np.ones(cols)
    x, z = np.ones(cols), np.ones(cols)
    s, y = np.ones(2 * rows), np.ones(2 * rows)
    pairs = cols + 2 * rows

    def directions(solve, r_p, r_d, r_xz, r_sy):
        rhs = -r_d + r_xz / x + g.T @ ((y / s) * r_p - r_sy / s)
        dx = solve(rhs)
        dy = (y / s) * (g @ dx - r_p) + r_sy / s
        dz = (r_xz - z * dx) / x
        ds = (r_sy - s * dy) / y
        return dx, dy, dz, ds

    status = "max_iterations"
    gap = primal = math.inf
    iteration = 0
    for iteration in range(1, max_iterations + 1):
        r_p = h - g @ x - s
        r_d = c + g.T @ y - z
        objective = float(c @ x)
        gap = abs(objective + float(h @ y)) / (1.0 + abs(objective))
        primal = float(np.max(np.abs(r_p))) if rows else 0.0
        dual = float(np.max(np.abs(r_d)))
        if not (math.isfinite(gap) and math.isfinite(primal) and math.isfinite(dual)):
            status = "numerical_error"
            break
        if primal <= feasibility_tol and dual <= feasibility_tol and gap <= optimality_tol:
            status = "optimal"
            break
        mu = (float(x @ z) + float(s @ y)) / pairs

        weights = y / s
        normal = (a.T * (weights[:rows] + weights[rows:])) @ a
        normal[np.diag_indices(cols)] += z / x
        try:
            solve = _factor(normal)
        except (linalg.LinAlgError, ValueError):
            status = "numerical_error"
            break

        dx, dy, dz, ds = directions(solve, r_p, r_d, -x * z, -s * y)
        alpha_p = min(_max_step(x, dx), _max_step(s, ds))
        alpha_d = min(_max_step(z, dz), _max_step(y, dy))
        mu_aff = (
            float((x + alpha_p * dx) @ (z + alpha_d * dz))
            + float((s + alpha_p * ds) @ (y + alpha_d * dy))
        ) / pairs
        sigma = (mu_aff / mu) ** 3

        dx, dy, dz, ds = directions(
            solve,
            r_p,
            r_d,
            sigma * mu - x * z - dx * dz,
            sigma * mu - s * y - ds * dy,
        )
        alpha_p = STEP_DAMPING * min(_max_step(x, dx), _max_step(s, ds))
        alpha_d = STEP_DAMPING * min(_max_step(z, dz), _max_step(y, dy))
        x, s = x + alpha_p * dx, s + alpha_p * ds
        y, z = y + alpha_d * dy, z + alpha_d * dz
        logger.debug(
            "Interior-point step",
            extra={"iteration": iteration, "mu": mu, "gap": gap, "primal": primal},
        )
    return LPSolution(
        x=np.maximum(x, 0.0),
        status=status,
        iterations=iteration,
        duality_gap=gap,
        primal_residual=primal,
    )

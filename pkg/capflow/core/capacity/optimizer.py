import math
from collections.abc import Callable
from typing import NamedTuple

import numpy as np

from capflow.config import logger
from capflow.core.capacity.schema import OptimizerConfig

Objective = Callable[[np.ndarray], tuple[float, np.ndarray]]

# Below this step size a rejected update ends the run.
MIN_STEP_SIZE = 1e-12


class OptimizerResult(NamedTuple):
    masses: np.ndarray
    energy: float
    steps: int
    status: str
    starts: int


class SimplexEnergyOptimizer:
    """Minimise an energy of probability masses by multiplicative updates.

    Each step maps ``m -> m * exp(-eta * g / max|g|)`` and renormalises. A step
    that raises the energy is rejected and ``eta`` is halved, so accepted
    energies never increase.
    """

    def __init__(self, objective: Objective, size: int, config: OptimizerConfig):
        self.objective = objective
        self.size = size
        self.config = config

    def starts(self) -> list[np.ndarray]:
        uniform = np.full(self.size, 1.0 / self.size)
        rng = np.random.default_rng(self.config.seed)
        return [uniform] + [
            rng.dirichlet(np.ones(self.size)) for _ in range(self.config.restarts)
        ]

    def run(self, start: np.ndarray) -> OptimizerResult:
        masses = start / start.sum()
        energy, gradient = self.objective(masses)
        if not math.isfinite(energy) or energy <= 0.0:
            return OptimizerResult(masses, energy, 0, "degenerate", 1)
        eta = self.config.step_size
        status = "max_steps"
        step = 0
        for step in range(1, self.config.steps + 1):
            scale = float(np.max(np.abs(gradient)))
            if scale == 0.0 or not math.isfinite(scale):
                status = "converged" if scale == 0.0 else "degenerate"
                break
            trial = masses * np.exp(-eta * gradient / scale)
            trial /= trial.sum()
            trial_energy, trial_gradient = self.objective(trial)
            if trial_energy <= energy:
                change = (energy - trial_energy) / energy
                masses, energy, gradient = trial, trial_energy, trial_gradient
                if change < self.config.rtol:
                    status = "converged"
                    break
            else:
                eta /= 2.0
                if eta < MIN_STEP_SIZE:
                    status = "stalled"
                    break
        return OptimizerResult(masses, energy, step, status, 1)

    def optimize(self) -> OptimizerResult:
        """Best of the uniform start and ``restarts`` Dirichlet starts."""
        best = None
        total_steps = 0
        starts = self.starts()
        for index, start in enumerate(starts):
            result = self.run(start)
            total_steps += result.steps
            logger.debug(
                "Optimizer start finished",
                extra={"start": index, "energy": result.energy, "status": result.status},
            )
            if result.status == "degenerate":
                continue
            if best is None or result.energy < best.energy:
                best = result
        if best is None:
            return OptimizerResult(starts[0], math.inf, total_steps, "degenerate", len(starts))
        return best._replace(steps=total_steps, starts=len(starts))

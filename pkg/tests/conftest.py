import numpy as np
import pytest

from capflow.core.kernels.schema import KernelParams
from capflow.core.measures.schema import DiscreteMeasure


def random_triples(rng: np.random.Generator, count: int, d: int, min_side: float = 1e-2):
    """Triples in the unit cube with every side at least ``min_side``."""
    x, y, z = (rng.uniform(-1.0, 1.0, size=(count, d)) for _ in range(3))
    sides = np.stack(
        [
            np.linalg.norm(x - y, axis=1),
            np.linalg.norm(y - z, axis=1),
            np.linalg.norm(x - z, axis=1),
        ],
        axis=1,
    )
    keep = sides.min(axis=1) >= min_side
    return x[keep], y[keep], z[keep]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def unit_params():
    return KernelParams(alpha=1.0, n=1, d=2)


@pytest.fixture
def two_atoms():
    return DiscreteMeasure.from_points([[0.0, 0.0], [1.0, 0.0]], [0.5, 0.5])


@pytest.fixture
def random_measure(rng):
    def build(count: int = 12, d: int = 2) -> DiscreteMeasure:
        atoms = rng.uniform(-1.0, 1.0, size=(count, d))
        masses = rng.uniform(0.1, 1.0, size=count)
        return DiscreteMeasure.from_points(atoms, masses)

    return build

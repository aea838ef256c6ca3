"""Monte-Carlo harness for the two-sided permutation bounds.

Triples are drawn in fixed-size chunks, each chunk from its own generator
seeded with ``[seed, chunk_index]``; chunks are evaluated on a thread pool and
reduced in chunk order.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from capflow.config import app_settings, logger
from capflow.core.geometry.service import batch_angle_sum
from capflow.core.kernels.schema import KernelParams
from capflow.core.symmetrization.schema import Envelope, PermCheckReport
from capflow.core.symmetrization.service import batch_ratios, perm_terms
from capflow.utils.cli_utils.exception import AxisOutOfRange, ParameterDomainError

SIGN_RTOL = 1e-12
VANISHING_TOL = 1e-10


class TripleSampler:
    """Random triples in the unit ball of ``R^d``.

    Generic triples are rejected when two points are closer than
    ``min_separation`` or when the largest side exceeds ``max_aspect`` times
    the smallest one.
    """

    def __init__(
        self,
        d: int,
        seed: int,
        chunk_size: int = 4096,
        min_separation: float = 1e-3,
        max_aspect: float = 1e3,
    ):
        self.d = d
        self.seed = seed
        self.chunk_size = chunk_size
        self.min_separation = min_separation
        self.max_aspect = max_aspect

    def _ball(self, rng: np.random.Generator, count: int) -> np.ndarray:
        direction = rng.standard_normal((count, self.d))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        radius = rng.random(count) ** (1.0 / self.d)
        return direction * radius[:, None]

    def _accept(self, x: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
        sides = np.stack(
            [
                np.linalg.norm(x - y, axis=1),
                np.linalg.norm(y - z, axis=1),
                np.linalg.norm(x - z, axis=1),
            ],
            axis=1,
        )
        shortest = sides.min(axis=1)
        return (shortest >= self.min_separation) & (
            sides.max(axis=1) <= self.max_aspect * shortest
        )

    def chunk(self, index: int, kind: str = "uniform", **options) -> tuple[np.ndarray, ...]:
        rng = np.random.default_rng([self.seed, index])
        sampler = getattr(self, f"_draw_{kind}")
        parts: list[tuple[np.ndarray, ...]] = []
        accepted = 0
        while accepted < self.chunk_size:
            x, y, z = sampler(rng, self.chunk_size, **options)
            keep = self._accept(x, y, z)
            parts.append((x[keep], y[keep], z[keep]))
            accepted += int(keep.sum())
        x, y, z = (np.concatenate(column)[: self.chunk_size] for column in zip(*parts))
        return x, y, z

    def _draw_uniform(self, rng, count):
        return self._ball(rng, count), self._ball(rng, count), self._ball(rng, count)

    def _draw_near_collinear(self, rng, count, eps: float = 0.0):
        x, y = self._ball(rng, count), self._ball(rng, count)
        t = rng.uniform(-1.0, 2.0, count)
        z = x + t[:, None] * (y - x) + eps * rng.standard_normal((count, self.d))
        return x, y, z

    def _draw_near_axis_degenerate(self, rng, count, axis: int = 0, eps: float = 0.0):
        x, y, z = self._draw_uniform(rng, count)
        level = rng.uniform(-0.5, 0.5, count)
        for point in (x, y, z):
            point[:, axis] = level + eps * rng.standard_normal(count)
        return x, y, z

    def sample(self, count: int, kind: str = "uniform", **options) -> tuple[np.ndarray, ...]:
        chunks = -(-count // self.chunk_size)
        drawn = [self.chunk(index, kind, **options) for index in range(chunks)]
        return tuple(np.concatenate(column)[:count] for column in zip(*drawn))


def _envelope(values: np.ndarray) -> Envelope:
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        return Envelope(minimum=float("inf"), maximum=float("-inf"), count=0)
    return Envelope(
        minimum=float(finite.min()), maximum=float(finite.max()), count=int(finite.size)
    )


def _relative_drift(half: float, full: float) -> float:
    if not np.isfinite(half) or not np.isfinite(full):
        return float("inf")
    if half == full:
        return 0.0
    return abs(full - half) / max(abs(half), abs(full))


def _summarise(ratios: dict[str, np.ndarray], curvature_ratio: np.ndarray | None, rows: int):
    """Envelopes over the first ``rows`` sampled triples."""
    components = ratios["components"][:rows]
    curvature = None
    curvature_samples = 0
    if curvature_ratio is not None:
        admissible = curvature_ratio[:rows]
        admissible = admissible[np.isfinite(admissible)]
        curvature_samples = int(admissible.size)
        curvature = float(admissible.min()) if admissible.size else None
    return {
        "lower": [_envelope(ratios["lower"][:rows, i]) for i in range(components.shape[1])],
        "upper": [_envelope(ratios["upper"][:rows, i]) for i in range(components.shape[1])],
        "total": _envelope(ratios["total"][:rows]),
        "negative": (components < 0.0).sum(axis=0),
        "violations": int((components < -SIGN_RTOL * ratios["scale"][:rows]).sum()),
        "curvature": curvature,
        "curvature_samples": curvature_samples,
    }


def perm_check(
    params: KernelParams,
    samples: int,
    seed: int = 0,
    theta0: float = 0.3,
    hyperplane_axis: int | None = None,
    partitions: int | None = None,
    chunk_size: int = 4096,
) -> PermCheckReport:
    """Sample triples and record the empirical bound envelopes.

    The envelopes are also computed on the first half of the sample; their
    relative change is reported as ``drift``.
    """
    if samples < 1:
        raise ParameterDomainError(f"at least one sample is needed, got {samples}")
    j = params.d - 1 if hyperplane_axis is None else hyperplane_axis
    if not 0 <= j < params.d:
        raise AxisOutOfRange(f"hyperplane axis {j} is outside 0..{params.d - 1}")
    sampler = TripleSampler(params.d, seed, chunk_size=min(chunk_size, max(samples, 1)))
    chunk_count = -(-samples // sampler.chunk_size)
    unit_alpha = params.alpha == 1.0

    def evaluate(index: int):
        x, y, z = sampler.chunk(index)
        stop = min(sampler.chunk_size, samples - index * sampler.chunk_size)
        x, y, z = x[:stop], y[:stop], z[:stop]
        ratios = batch_ratios(params, x, y, z)
        if unit_alpha:
            admissible = (batch_angle_sum(x, y, z, j) >= theta0) & (ratios["curvature"] > 0.0)
            others = np.delete(ratios["components"], j, axis=1).sum(axis=1)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios["curvature_ratio"] = np.where(
                    admissible, others / ratios["curvature"] ** 2, np.nan
                )
        return ratios

    workers = partitions or app_settings.partition_count
    with ThreadPoolExecutor(max_workers=workers) as pool:
        chunks = list(pool.map(evaluate, range(chunk_count)))
    ratios = {key: np.concatenate([chunk[key] for chunk in chunks]) for key in chunks[0]}
    curvature_ratio = ratios.pop("curvature_ratio", None)

    full = _summarise(ratios, curvature_ratio, samples)
    half = _summarise(ratios, curvature_ratio, max(1, samples // 2))
    drift = {
        "total_ratio_min": _relative_drift(half["total"].minimum, full["total"].minimum),
        "total_ratio_max": _relative_drift(half["total"].maximum, full["total"].maximum),
        "upper_ratio_max": max(
            _relative_drift(h.maximum, f.maximum) for h, f in zip(half["upper"], full["upper"])
        ),
        "lower_ratio_min": max(
            _relative_drift(h.minimum, f.minimum) for h, f in zip(half["lower"], full["lower"])
        ),
    }
    if full["curvature"] is not None and half["curvature"] is not None:
        drift["curvature_floor"] = _relative_drift(half["curvature"], full["curvature"])

    vanishing = _vanishing_max(params, sampler, samples) if unit_alpha else None
    logger.info(
        "Permutation harness finished",
        extra={"alpha": params.alpha, "n": params.n, "d": params.d, "samples": samples},
    )
    return PermCheckReport(
        alpha=params.alpha,
        n=params.n,
        d=params.d,
        samples=samples,
        seed=seed,
        theta0=theta0,
        hyperplane_axis=j,
        lower_ratio=full["lower"],
        upper_ratio=full["upper"],
        total_ratio=full["total"],
        negative_fraction=[float(count) / samples for count in full["negative"]],
        sign_violations=full["violations"],
        vanishing_max=vanishing,
        curvature_floor=full["curvature"],
        curvature_samples=full["curvature_samples"],
        drift=drift,
    )


def _relative_components(params: KernelParams, x, y, z) -> np.ndarray:
    first, second, third = perm_terms(params, x, y, z)
    scale = np.maximum.reduce([np.abs(first), np.abs(second), np.abs(third)])
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(scale > 0.0, np.abs(first + second + third) / scale, 0.0)


def _vanishing_max(params: KernelParams, sampler: TripleSampler, samples: int) -> float:
    """Largest ``|p^i|`` over collinear and axis-flat triples.

    Each value is measured against the largest of the three products it sums.
    """
    count = min(samples, sampler.chunk_size)
    x, y, z = sampler.chunk(0, "near_collinear")
    worst = float(_relative_components(params, x[:count], y[:count], z[:count]).max())
    for axis in range(params.d):
        x, y, z = sampler.chunk(1 + axis, "near_axis_degenerate", axis=axis)
        flat = _relative_components(params, x[:count], y[:count], z[:count])[:, axis]
        worst = max(worst, float(flat.max()))
    if worst > VANISHING_TOL:
        logger.warning("Permutations do not vanish on degenerate triples", extra={"worst": worst})
    return worst

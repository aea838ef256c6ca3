import csv
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any

from capflow.config import app_settings, logger
from capflow.core.capacity.schema import (
    CapacityEstimate,
    Diagnostics,
    ExperimentRow,
    LPConfig,
    OptimizerConfig,
    RectifiabilityRow,
)
from capflow.core.capacity.service import (
    gamma_plus_energy,
    gamma_plus_lp,
    riesz_capacity_wolff,
)
from capflow.core.kernels.schema import KernelParams
from capflow.core.measures.schema import WolffParams
from capflow.core.measures.service import curvature_energy, triple_perm_energy
from capflow.core.sets.schema import PointCloud, SetSpec
from capflow.core.sets.service import generate
from capflow.utils.base.schema import SchemaBase
from capflow.utils.cli_utils.exception import ExceptionBase, ParameterDomainError

TABLE_COLUMNS = (
    "set",
    "generation",
    "alpha",
    "n",
    "gamma_lp",
    "gamma_energy",
    "riesz_wolff",
    "ratio_lp_wolff",
    "ratio_energy_wolff",
    "status",
)


def _cloud(item: SetSpec | PointCloud) -> PointCloud:
    return generate(item) if isinstance(item, SetSpec) else item


def _generation(cloud: PointCloud) -> int:
    return cloud.provenance.resolution if cloud.provenance is not None else cloud.size


def _ratio(numerator: float, denominator: float) -> float:
    if not (math.isfinite(numerator) and math.isfinite(denominator)) or denominator == 0.0:
        return math.nan
    return numerator / denominator


def _attempt(name: str, estimator) -> tuple[float, str, Diagnostics]:
    """Run one estimator; failures become a status instead of an exception."""
    try:
        estimate: CapacityEstimate = estimator()
    except (ExceptionBase, ValueError) as e:
        logger.warning("Estimator failed", extra={"estimator": name, "error": str(e)})
        return math.nan, f"{name}:{type(e).__name__}", Diagnostics(status="error")
    if not estimate.success:
        return estimate.value, f"{name}:{estimate.diagnostics.status}", estimate.diagnostics
    return estimate.value, "", estimate.diagnostics


def _rows_for(
    name: str,
    cloud: PointCloud,
    alpha: float,
    ns: Sequence[int],
    cfg: LPConfig,
    optimizer: OptimizerConfig,
) -> list[ExperimentRow]:
    wolff, wolff_status, wolff_diagnostics = _attempt(
        "wolff",
        lambda: riesz_capacity_wolff(
            cloud, WolffParams.for_alpha(alpha, cloud.d), config=optimizer
        ),
    )
    rows = []
    for n in ns:
        params = KernelParams(alpha=alpha, n=n, d=cloud.d)
        lp, lp_status, lp_diagnostics = _attempt("lp", lambda: gamma_plus_lp(cloud, params, cfg))
        energy, energy_status, energy_diagnostics = _attempt(
            "energy", lambda: gamma_plus_energy(cloud, params, config=optimizer)
        )
        failures = [s for s in (lp_status, energy_status, wolff_status) if s]
        rows.append(
            ExperimentRow(
                set=name,
                generation=_generation(cloud),
                alpha=alpha,
                n=n,
                gamma_lp=lp,
                gamma_energy=energy,
                riesz_wolff=wolff,
                ratio_lp_wolff=_ratio(lp, wolff),
                ratio_energy_wolff=_ratio(energy, wolff),
                status=";".join(failures) if failures else "ok",
                diagnostics={
                    "lp": lp_diagnostics,
                    "energy": energy_diagnostics,
                    "wolff": wolff_diagnostics,
                },
            )
        )
    return rows


def comparability_experiment(
    sets: Sequence[SetSpec | PointCloud],
    alphas: Sequence[float],
    ns: Sequence[int],
    cfg: LPConfig = LPConfig(),
    optimizer: OptimizerConfig = OptimizerConfig(),
    workers: int | None = None,
    names: Sequence[str] | None = None,
) -> list[ExperimentRow]:
    """One row per (set, alpha, n): the three capacity estimates and their ratios.

    The Wolff estimate depends only on the set and ``alpha`` and is shared by
    the rows of every ``n``. Rows come back in (set, alpha, n) order and
    ``names``, when given, replaces the set labels.
    """
    if not sets or not alphas or not ns:
        raise ParameterDomainError("the experiment needs at least one set, alpha and n")
    for alpha in alphas:
        if not 0.0 < alpha < 1.0:
            raise ParameterDomainError(f"alpha must lie in (0, 1), got {alpha}")
    clouds = [_cloud(item) for item in sets]
    names = list(names) if names is not None else [cloud.label for cloud in clouds]
    tasks = [(name, cloud, alpha) for name, cloud in zip(names, clouds) for alpha in alphas]
    with ThreadPoolExecutor(max_workers=workers or app_settings.partition_count) as pool:
        blocks = list(pool.map(lambda task: _rows_for(*task, ns, cfg, optimizer), tasks))
    rows = [row for block in blocks for row in block]
    logger.info(
        "Finished comparability experiment",
        extra={"rows": len(rows), "failed": sum(not row.success for row in rows)},
    )
    return rows


def rectifiability_profile(
    sets: Sequence[SetSpec | PointCloud],
    ns: Sequence[int],
    partitions: int | None = None,
    names: Sequence[str] | None = None,
) -> list[RectifiabilityRow]:
    """Triple energies per unit mass; they vanish on segments and grow on Cantor sets."""
    rows = []
    for index, item in enumerate(sets):
        cloud = _cloud(item)
        name = names[index] if names is not None else cloud.label
        measure = cloud.as_measure()
        mass = measure.total_mass
        curvature = curvature_energy(measure, partitions)
        for n in ns:
            triple = triple_perm_energy(measure, n, partitions)
            rows.append(
                RectifiabilityRow(
                    set=name,
                    generation=_generation(cloud),
                    n=n,
                    points=cloud.size,
                    total_mass=mass,
                    triple_energy=triple,
                    normalized_triple_energy=triple / mass if mass > 0.0 else math.nan,
                    curvature_energy=curvature,
                    normalized_curvature_energy=curvature / mass if mass > 0.0 else math.nan,
                )
            )
    return rows


def _cell(value: Any) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    return str(value)


def write_table_csv(
    rows: Sequence[SchemaBase], path: str | Path, columns: Sequence[str] = TABLE_COLUMNS
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(getattr(row, column)) for column in columns])
    return path

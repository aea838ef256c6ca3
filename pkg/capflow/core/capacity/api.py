import argparse
from pathlib import Path

from capflow.core.capacity.experiment import (
    comparability_experiment,
    rectifiability_profile,
    write_table_csv,
)
from capflow.core.capacity.schema import LPConfig, OptimizerConfig, RectifiabilityRow
from capflow.core.capacity.service import (
    gamma_plus_energy,
    gamma_plus_lp,
    riesz_capacity_wolff,
)
from capflow.core.kernels.schema import KernelParams
from capflow.core.measures.schema import WolffParams
from capflow.core.sets.repository import CloudRepository
from capflow.core.sets.schema import PointCloud
from capflow.utils.base.repository import write_document
from capflow.utils.base.router import Argument, CommandRouter, flags_of
from capflow.utils.base.schema import OutputFormat, RunConfig
from capflow.utils.cli_utils.exception import (
    InputValidationException,
    PartialFailureException,
    SolverFailureException,
    UsageException,
)

router = CommandRouter()

LP_ARGUMENTS = [
    Argument("--h", type=float, default=None, help="absolute grid spacing"),
    Argument(
        "--grid-resolution",
        type=int,
        default=24,
        help="grid spacing as diameter / resolution when --h is not given",
    ),
    Argument("--delta-factor", type=float, default=0.5, help="separation as a multiple of h"),
]
OPTIMIZER_ARGUMENTS = [
    Argument("--steps", type=int, default=200, help="optimizer steps per start"),
]


def _lp_config(args: argparse.Namespace) -> LPConfig:
    return LPConfig(
        h=args.h,
        grid_resolution=args.grid_resolution,
        separation_factor=args.delta_factor,
    )


def _optimizer_config(args: argparse.Namespace, run: RunConfig) -> OptimizerConfig:
    return OptimizerConfig(steps=args.steps, seed=run.seed)


def _load_clouds(paths: list[str]) -> tuple[list[PointCloud], list[str]]:
    repository = CloudRepository()
    clouds, names = [], []
    for path in paths:
        cloud = repository.get(path)
        if cloud.size == 0:
            raise InputValidationException(f"cloud file {path} has no points")
        clouds.append(cloud)
        names.append(cloud.label if cloud.provenance is not None else Path(path).stem)
    return clouds, names


@router.command(
    "capacity",
    help="estimate a capacity of a point cloud",
    arguments=[
        Argument("--set", required=True, help="cloud JSON file"),
        Argument("--method", required=True, choices=["lp", "wolff", "energy"]),
        Argument("--alpha", type=float, default=0.5),
        Argument("--n", type=int, default=1),
        Argument("--wolff-s", type=float, default=None),
        Argument("--wolff-p", type=float, default=None),
        *LP_ARGUMENTS,
        *OPTIMIZER_ARGUMENTS,
    ],
)
def capacity(args: argparse.Namespace, run: RunConfig) -> int:
    if run.format is not OutputFormat.json:
        raise UsageException("capacity writes JSON only")
    (support,), _ = _load_clouds([args.set])
    if args.method == "lp":
        estimate = gamma_plus_lp(
            support, KernelParams(alpha=args.alpha, n=args.n, d=support.d), _lp_config(args)
        )
    elif args.method == "wolff":
        if (args.wolff_s is None) != (args.wolff_p is None):
            raise UsageException("--wolff-s and --wolff-p go together")
        if args.wolff_s is None:
            wp = WolffParams.for_alpha(args.alpha, support.d)
        else:
            wp = WolffParams(s=args.wolff_s, p=args.wolff_p, dimension=support.d)
        estimate = riesz_capacity_wolff(support, wp, config=_optimizer_config(args, run))
    else:
        estimate = gamma_plus_energy(
            support,
            KernelParams(alpha=args.alpha, n=args.n, d=support.d),
            config=_optimizer_config(args, run),
        )
    path = write_document(
        run.output_path("capacity.json"),
        {"estimate": estimate, "metadata": run.metadata("capacity", flags_of(args))},
    )
    print(f"{path} {estimate.method.value} {estimate.value!r} {estimate.diagnostics.status}")
    if not estimate.success:
        raise SolverFailureException(
            f"{estimate.method.value} estimate ended with status {estimate.diagnostics.status}"
        )
    return 0


@router.command(
    "compare",
    help="run the capacity comparability experiment",
    arguments=[
        Argument("--sets", required=True, nargs="+", help="cloud JSON files"),
        Argument("--alphas", required=True, nargs="+", type=float),
        Argument("--ns", required=True, nargs="+", type=int),
        *LP_ARGUMENTS,
        *OPTIMIZER_ARGUMENTS,
    ],
)
def compare(args: argparse.Namespace, run: RunConfig) -> int:
    clouds, names = _load_clouds(args.sets)
    rows = comparability_experiment(
        clouds,
        args.alphas,
        args.ns,
        _lp_config(args),
        _optimizer_config(args, run),
        workers=run.partition_count,
        names=names,
    )
    table = write_table_csv(rows, run.output_path("compare.csv", ".csv"))
    mirror = write_document(
        run.output_path("compare.json", ".json"),
        {"rows": rows, "metadata": run.metadata("compare", flags_of(args))},
    )
    print(f"{table} {mirror} rows={len(rows)}")
    failed = [row for row in rows if not row.success]
    if failed:
        raise PartialFailureException(f"{len(failed)} of {len(rows)} rows did not succeed")
    return 0


@router.command(
    "rectify",
    help="normalized triple energies of point clouds",
    arguments=[
        Argument("--sets", required=True, nargs="+", help="cloud JSON files"),
        Argument("--ns", nargs="+", type=int, default=[1]),
    ],
)
def rectify(args: argparse.Namespace, run: RunConfig) -> int:
    clouds, names = _load_clouds(args.sets)
    rows = rectifiability_profile(clouds, args.ns, run.partition_count, names=names)
    for row in rows:
        print(f"{row.set} n={row.n} {row.normalized_triple_energy!r}")
    if run.format is OutputFormat.csv:
        columns = list(RectifiabilityRow.model_fields)
        write_table_csv(rows, run.output_path("rectify.csv", ".csv"), columns)
    document = {"rows": rows, "metadata": run.metadata("rectify", flags_of(args))}
    write_document(run.output_path("rectify.json", ".json"), document)
    return 0

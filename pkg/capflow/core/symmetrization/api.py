import argparse

from capflow.core.kernels.schema import KernelParams
from capflow.core.symmetrization.harness import perm_check
from capflow.utils.base.repository import write_document
from capflow.utils.base.router import Argument, CommandRouter, flags_of
from capflow.utils.base.schema import OutputFormat, RunConfig
from capflow.utils.cli_utils.exception import UsageException

router = CommandRouter()


@router.command(
    "perm-check",
    help="sample triples and record the permutation bound envelopes",
    arguments=[
        Argument("--alpha", type=float, required=True),
        Argument("--n", type=int, required=True),
        Argument("--d", type=int, default=2),
        Argument("--samples", type=int, default=10_000),
        Argument("--theta0", type=float, default=0.3, help="angle condition threshold"),
        Argument(
            "--hyperplane-axis",
            type=int,
            default=None,
            help="0-based axis of the hyperplane in the curvature ratio (default d-1)",
        ),
    ],
)
def perm_check_command(args: argparse.Namespace, run: RunConfig) -> int:
    if run.format is not OutputFormat.json:
        raise UsageException("perm-check writes JSON only")
    params = KernelParams(alpha=args.alpha, n=args.n, d=args.d)
    report = perm_check(
        params,
        args.samples,
        seed=run.seed,
        theta0=args.theta0,
        hyperplane_axis=args.hyperplane_axis,
        partitions=run.partition_count,
    )
    path = write_document(
        run.output_path("perm_check.json"),
        {"report": report, "metadata": run.metadata("perm-check", flags_of(args))},
    )
    print(f"{path} sign_violations={report.sign_violations}")
    return 0

import argparse

from capflow.core.kernels.schema import KernelParams
from capflow.core.measures.repository import MeasureRepository
from capflow.core.measures.schema import WolffParams
from capflow.core.measures.service import (
    curvature_energy,
    sym_energy_terms,
    triple_perm_energy,
    wolff_energy,
)
from capflow.utils.base.repository import write_document
from capflow.utils.base.router import Argument, CommandRouter, flags_of
from capflow.utils.base.schema import OutputFormat, RunConfig
from capflow.utils.cli_utils.exception import InputValidationException, UsageException

router = CommandRouter()


@router.command(
    "energy",
    help="energies of a discrete measure",
    arguments=[
        Argument("--measure", required=True, help="measure or cloud JSON file"),
        Argument("--alpha", type=float, default=1.0),
        Argument("--n", type=int, default=1),
        Argument("--wolff-s", type=float, default=None),
        Argument("--wolff-p", type=float, default=None),
        Argument("--triple", action="store_true", help="also the alpha = 1 triple energy"),
        Argument("--curvature", action="store_true", help="also the Menger curvature energy"),
    ],
)
def energy(args: argparse.Namespace, run: RunConfig) -> int:
    if run.format is not OutputFormat.json:
        raise UsageException("energy writes JSON only")
    if (args.wolff_s is None) != (args.wolff_p is None):
        raise UsageException("--wolff-s and --wolff-p go together")
    mu = MeasureRepository().get(args.measure)
    if mu.size == 0:
        raise InputValidationException(f"measure file {args.measure} has no atoms")

    params = KernelParams(alpha=args.alpha, n=args.n, d=mu.d)
    growth, perm = sym_energy_terms(mu, params, run.partition_count)
    energies = {"sym_energy": growth + perm, "sym_growth": growth, "sym_perm": perm}
    if args.wolff_s is not None:
        wp = WolffParams(s=args.wolff_s, p=args.wolff_p, dimension=mu.d)
        energies["wolff_energy"] = wolff_energy(mu, wp, run.partition_count)
    if args.triple:
        energies["triple_perm_energy"] = triple_perm_energy(mu, args.n, run.partition_count)
    if args.curvature:
        energies["curvature_energy"] = curvature_energy(mu, run.partition_count)

    for name, value in energies.items():
        print(f"{name} {value!r}")
    write_document(
        run.output_path("energy.json"),
        {"energies": energies, "metadata": run.metadata("energy", flags_of(args))},
    )
    return 0

import argparse

from capflow.core.sets.repository import CloudRepository
from capflow.core.sets.schema import Profile, SetKind, SetSpec, Similarity
from capflow.core.sets.service import generate
from capflow.utils.base.router import Argument, CommandRouter, flags_of
from capflow.utils.base.schema import RunConfig

router = CommandRouter()

GENERATED_KINDS = [kind.value for kind in SetKind if kind is not SetKind.custom]


@router.command(
    "gen",
    help="generate a test set as a point cloud file",
    arguments=[
        Argument("--kind", required=True, choices=GENERATED_KINDS),
        Argument("--generation", type=int, default=0, help="Cantor generation"),
        Argument("--ratio", type=float, default=0.25, help="Cantor contraction ratio"),
        Argument("--n-samples", type=int, default=64, help="points on a curve"),
        Argument("--length", type=float, default=1.0, help="segment length"),
        Argument("--radius", type=float, default=1.0, help="circle radius"),
        Argument("--profile", choices=[p.value for p in Profile], default=Profile.tent.value),
        Argument("--slope", type=float, default=0.5, help="tent profile slope"),
        Argument("--amplitude", type=float, default=0.5, help="sine profile Lipschitz bound"),
        Argument("--frequency", type=int, default=1, help="sine profile frequency"),
        Argument("--dimension", type=int, default=2, help="ambient dimension"),
        Argument("--scale", type=float, default=1.0),
        Argument("--rotate", type=float, default=0.0, help="rotation angle in radians"),
        Argument("--translate", type=float, nargs="+", default=[]),
    ],
)
def gen(args: argparse.Namespace, run: RunConfig) -> int:
    spec = SetSpec(
        kind=args.kind,
        generation=args.generation,
        ratio=args.ratio,
        n_samples=args.n_samples,
        length=args.length,
        radius=args.radius,
        profile=args.profile,
        slope=args.slope,
        amplitude=args.amplitude,
        frequency=args.frequency,
        dimension=args.dimension,
        transform=Similarity(
            scale=args.scale, rotation=args.rotate, translation=tuple(args.translate)
        ),
    )
    cloud = generate(spec)
    path = CloudRepository().save_object(
        cloud, run.output_path("cloud.json"), **run.metadata("gen", flags_of(args))
    )
    print(f"{path} {cloud.size}")
    return 0

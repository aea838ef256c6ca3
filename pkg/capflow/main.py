import sys

from capflow import __version__
from capflow.config import app_settings, logger
from capflow.routes import root_router
from capflow.utils.cli_utils.builder import CliBuilder

main = (
    CliBuilder(
        prog="capflow",
        version=__version__,
        logger=logger,
        default_partitions=app_settings.partition_count,
        description="Capacities, kernels and curvature energies of planar point sets",
    )
    .add_run_arguments()
    .handle_exceptions()
    .add_root_router(root_router)
    .build()
)


if __name__ == "__main__":
    sys.exit(main())

from __future__ import annotations

import argparse
import sys
from collections.abc import Callable, Sequence
from logging import Logger

from pydantic import ValidationError

from capflow.utils.base.router import CommandRouter
from capflow.utils.base.schema import OutputFormat, RunConfig
from capflow.utils.cli_utils.exception import ExceptionBase, UsageException

Main = Callable[[Sequence[str] | None], int]


class CliBuilder:
    """A builder for the command-line entry point.

    Mirrors the fluent set-up of a web application: common flags, exception
    handling and the root router are added step by step and :meth:`build`
    returns the ``main(argv) -> exit code`` callable.

    Attributes:
        parser: The top-level argument parser.
        logger: Logger used to report handled and unhandled failures.
    """

    def __init__(
        self,
        prog: str,
        version: str,
        logger: Logger,
        default_partitions: int,
        description: str | None = None,
    ) -> None:
        self.parser = argparse.ArgumentParser(prog=prog, description=description)
        self.parser.add_argument("--version", action="version", version=f"{prog} {version}")
        self.subparsers = self.parser.add_subparsers(dest="command", required=True)
        self.common = argparse.ArgumentParser(add_help=False)
        self.logger = logger
        self.default_partitions = default_partitions
        self.exception_handling = False

    def add_run_arguments(self) -> CliBuilder:
        """Flags shared by every command; they become the :class:`RunConfig`."""
        group = self.common.add_argument_group("run")
        group.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
        group.add_argument(
            "--partition-count",
            type=int,
            default=self.default_partitions,
            help="partitions of parallel reductions (fixed for reproducible output)",
        )
        group.add_argument("--output", "-o", default=None, help="output file")
        group.add_argument(
            "--format",
            choices=[f.value for f in OutputFormat],
            default=OutputFormat.json.value,
            help="output format for tables",
        )
        return self

    def handle_exceptions(self) -> CliBuilder:
        """Turn failures into exit codes.

        Handles:
        - application exceptions (ExceptionBase): their own exit code
        - pydantic validation errors from flags: exit code 2
        - anything else: exit code 1, logged with its traceback
        """
        self.exception_handling = True
        return self

    def add_root_router(self, router: CommandRouter) -> CliBuilder:
        for command in router.commands:
            sub = self.subparsers.add_parser(
                command.name, help=command.help, parents=[self.common]
            )
            for argument in command.arguments:
                argument.add_to(sub)
            sub.set_defaults(handler=command.handler)
        return self

    def _dispatch(self, args: argparse.Namespace) -> int:
        run = RunConfig(
            seed=args.seed,
            partition_count=args.partition_count,
            output=args.output,
            format=args.format,
        )
        return args.handler(args, run)

    def _guarded(self, args: argparse.Namespace) -> int:
        try:
            return self._dispatch(args)
        except ExceptionBase as exc:
            self.logger.error(
                "Command failed",
                extra={"exit_code": exc.exit_code, "detail": exc.detail},
            )
            print(f"error: {exc.detail}", file=sys.stderr)
            return exc.exit_code
        except ValidationError as exc:
            self.logger.warning("Invalid parameters", extra={"errors": exc.errors()})
            print(f"error: {exc}", file=sys.stderr)
            return UsageException.exit_code
        except Exception as exc:
            self.logger.exception(f"Unhandled exception occurred: {str(exc)}")
            return 1

    def build(self) -> Main:
        parser = self.parser

        def main(argv: Sequence[str] | None = None) -> int:
            try:
                args = parser.parse_args(argv)
            except SystemExit as exit_:
                return exit_.code if isinstance(exit_.code, int) else 2
            if self.exception_handling:
                return self._guarded(args)
            return self._dispatch(args)

        return main

from __future__ import annotations

import argparse
from collections.abc import Callable, Sequence
from typing import Any, NamedTuple

from capflow.utils.base.schema import RunConfig

Handler = Callable[[argparse.Namespace, RunConfig], int]


class Argument:
    """Flags and options forwarded to ``ArgumentParser.add_argument``."""

    def __init__(self, *flags: str, **options: Any) -> None:
        self.flags = flags
        self.options = options

    def add_to(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument(*self.flags, **self.options)


class Command(NamedTuple):
    name: str
    help: str
    arguments: tuple[Argument, ...]
    handler: Handler


class CommandRouter:
    """Collects the commands of one domain.

    Handlers receive the parsed flags and the shared :class:`RunConfig` and
    return the process exit code.
    """

    def __init__(self, commands: Sequence[Command] | None = None) -> None:
        self.commands: list[Command] = list(commands or [])

    def command(
        self, name: str, help: str, arguments: Sequence[Argument] = ()
    ) -> Callable[[Handler], Handler]:
        def register(handler: Handler) -> Handler:
            self.commands.append(Command(name, help, tuple(arguments), handler))
            return handler

        return register

    def include_router(self, router: CommandRouter) -> CommandRouter:
        taken = {command.name for command in self.commands}
        for command in router.commands:
            if command.name in taken:
                raise ValueError(f"command {command.name!r} is registered twice")
            self.commands.append(command)
        return self


def flags_of(args: argparse.Namespace) -> dict[str, Any]:
    """The parsed flags as recorded in output metadata."""
    return {key: value for key, value in vars(args).items() if key not in ("handler", "command")}

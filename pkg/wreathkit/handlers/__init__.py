from __future__ import annotations

import argparse
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

from loguru import logger

from wreathkit import __version__
from wreathkit.errors import VerificationError, WreathkitError
from wreathkit.services import intern_state

Handler = Callable[[argparse.Namespace], int]

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def arg(*flags: str, **options: Any) -> tuple[tuple[str, ...], dict[str, Any]]:
    """Описание аргумента подкоманды: флаги и параметры add_argument."""

    return flags, options


@dataclass
class Command:
    name: str
    help: str
    handler: Handler
    arguments: Sequence[tuple[tuple[str, ...], dict[str, Any]]] = ()


@dataclass
class Router:
    """
    Реестр подкоманд одного модуля обработчиков.

    :ivar commands: Имя подкоманды -> Command.
    """
    commands: dict[str, Command] = field(default_factory=dict)

    def command(
        self,
        name: str,
        help: str,  # noqa: A002
        arguments: Sequence[tuple[tuple[str, ...], dict[str, Any]]] = (),
    ) -> Callable[[Handler], Handler]:
        def register(handler: Handler) -> Handler:
            if name in self.commands:
                raise ValueError(f"Подкоманда {name!r} уже зарегистрирована.")
            self.commands[name] = Command(name, help, handler, arguments)
            return handler

        return register


def build_parser(*routers: Router) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wreathkit",
        description="Инструменты для ограниченных автоматных групп и материнских групп G_d.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for router in routers:
        for command in router.commands.values():
            sub = subparsers.add_parser(command.name, help=command.help, description=command.help)
            for flags, options in command.arguments:
                sub.add_argument(*flags, **options)
            sub.set_defaults(handler=command.handler)
    return parser


def dispatch(argv: Sequence[str] | None, *routers: Router) -> int:
    """
    Разбирает аргументы и вызывает обработчик.

    :param argv: Аргументы без имени программы (None — sys.argv).
    :param routers: Роутеры с подкомандами.
    :return: 0 — успех, 1 — непрошедшая машинная проверка, 2 — ошибка ввода.
    """

    parser = build_parser(*routers)
    try:
        namespace = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return namespace.handler(namespace)
    except VerificationError as exc:
        logger.error("{}: {}", type(exc).__name__, exc)
        return EXIT_FAILED
    except WreathkitError as exc:
        logger.error("{}: {}", type(exc).__name__, exc)
        return EXIT_USAGE
    except OSError as exc:
        logger.error("I/O error: {}", exc)
        return EXIT_USAGE
    finally:
        # Кэш живёт в пределах одной команды.
        logger.debug("intern table: {} elements", intern_state.table_size())
        intern_state.reset_table()

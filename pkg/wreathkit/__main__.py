import sys
from collections.abc import Sequence

from loguru import logger

from wreathkit.config import settings
from wreathkit.handlers import commands, dispatch, suite


def setup_logging() -> None:
    """
    Настраивает loguru: один поток в stderr, stdout остаётся для вывода команд.

    :return: None
    """
    logger.remove()
    logger.add(
        sink=sys.stderr,
        level=settings.log_level,
        format="{time:YYYY-MM-DD HH:mm:ss} | {level} | {message}",
    )


def main(argv: Sequence[str] | None = None) -> int:
    """
    Точка входа командной строки.

    :param argv: Аргументы без имени программы.
    :return: Код выхода.
    """
    setup_logging()
    code = dispatch(argv, commands.router, suite.router)
    logger.debug("exit code {}", code)
    return code


if __name__ == "__main__":
    sys.exit(main())

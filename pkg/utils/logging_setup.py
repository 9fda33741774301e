import logging
from pathlib import Path
from typing import Optional, Union

from pythonjsonlogger.json import JsonFormatter
from rich.console import Console
from rich.logging import RichHandler

from config.settings import LOG_FILE, LOG_LEVEL

# Shared console for status lines and the rich log handler
console = Console(stderr=True)

_configured = False


def setup_logging(
    level: Union[str, int] = LOG_LEVEL,
    log_file: Optional[Union[str, Path]] = LOG_FILE,
    force: bool = False
) -> logging.Logger:
    """
    Configure root logging once per process

    Args:
        level: Log level name or number
        log_file: Optional path for JSON-lines log records
        force: Reinstall handlers even if already configured

    Returns:
        The root logger
    """
    global _configured
    root = logging.getLogger()

    if _configured and not force:
        root.setLevel(level)
        return root

    for handler in list(root.handlers):
        root.removeHandler(handler)

    rich_handler = RichHandler(
        console=console,
        show_path=False,
        rich_tracebacks=True,
        markup=False
    )
    rich_handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))
    root.addHandler(rich_handler)

    if log_file:
        file_handler = logging.FileHandler(str(log_file), encoding="utf-8")
        file_handler.setFormatter(JsonFormatter(
            "%(asctime)s %(levelname)s %(name)s %(message)s",
            rename_fields={"asctime": "timestamp", "levelname": "level"}
        ))
        root.addHandler(file_handler)

    root.setLevel(level)
    logging.getLogger("joblib").setLevel(logging.WARNING)

    _configured = True
    return root


def status_ok(message: str) -> None:
    """Print a success status line"""
    console.print(f"[green]✓[/green] {message}")


def status_fail(message: str) -> None:
    """Print a failure status line"""
    console.print(f"[red]✗[/red] {message}")

"""Shared CLI plumbing: log handler setup and error reporting."""

import logging
from contextlib import contextmanager
from typing import Iterator

import typer
from rich.logging import RichHandler
from rich.markup import escape

from fpsim.errors import ConfigError, FpsimError
from fpsim.output.formatter import console


def setup_logging(verbose: bool) -> None:
    """Route package logs through one RichHandler on stderr."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, show_path=False, rich_tracebacks=False)],
        force=True,
    )


def exit_code_for(error: Exception) -> int:
    if isinstance(error, FileNotFoundError):
        return ConfigError.exit_code
    if isinstance(error, FpsimError):
        return error.exit_code
    return 1


@contextmanager
def reported_errors() -> Iterator[None]:
    """Print ``Error: ...`` in red and exit with the error's code."""
    try:
        yield
    except (FpsimError, FileNotFoundError, ValueError) as e:
        console.print(f"[red]Error: {escape(str(e))}[/red]")
        raise typer.Exit(exit_code_for(e))


def parse_floats(text: str, option: str) -> list[float]:
    """Comma-separated floats such as ``0.6,0.4``."""
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise typer.BadParameter(f"expected comma-separated numbers, got {text!r}", param_hint=option)


def parse_ints(text: str, option: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise typer.BadParameter(f"expected comma-separated integers, got {text!r}", param_hint=option)

"""Output formatting utilities: stable CSV text and rich summary tables."""

import csv
import io
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import typer
from rich.console import Console
from rich.table import Table


console = Console(stderr=True)


def format_value(value: Any) -> str:
    """Render a cell. Floats use the shortest repr that round-trips."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(float(value))
    if hasattr(value, "item"):
        return format_value(value.item())
    return str(value)


def format_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Format rows as CSV text with ``\\n`` line endings."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def write_csv(
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    path: str | Path | None = None,
) -> str:
    """Write CSV to ``path``, or to stdout when no path is given."""
    text = format_csv(header, rows)
    if path is None:
        typer.echo(text, nl=False)
    else:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text)
    return text


def create_table(title: str, columns: list[str]) -> Table:
    """Create a Rich table with given columns."""
    table = Table(title=title)
    for col in columns:
        table.add_column(col)
    return table


def print_table(title: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    """Print rows as a rich table on stderr, floats rounded for reading."""
    table = create_table(title, list(header))
    for row in rows:
        table.add_row(*[f"{v:.3f}" if isinstance(v, float) else str(v) for v in row])
    console.print(table)

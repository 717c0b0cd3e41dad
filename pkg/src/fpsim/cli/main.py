"""fpsim CLI entry point."""

import typer
from rich.console import Console

from .common import setup_logging

app = typer.Typer(
    name="fpsim",
    help="Fingerprinting localization simulator",
    no_args_is_help=True,
    invoke_without_command=True,
)

console = Console()


@app.callback()
def main(
    show_version: bool = typer.Option(
        False, "--version", "-V", help="Show version and exit"
    ),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log progress to stderr"),
) -> None:
    """fpsim: RSS fingerprinting simulations and hypothesis-testing analyses."""
    if show_version:
        from fpsim import __version__

        console.print(f"fpsim {__version__}")
        raise typer.Exit()
    setup_logging(verbose)


@app.command()
def version():
    """Show fpsim version."""
    from fpsim import __version__

    console.print(f"fpsim {__version__}")


# Simulation
from fpsim.cli.simulate import simulate
from fpsim.cli.spatial_map import spatial_map

app.command()(simulate)
app.command(name="spatial-map")(spatial_map)

# Analysis
from fpsim.cli.analyze_kl import analyze_kl
from fpsim.cli.exponent import exponent
from fpsim.cli.place_anchors import place_anchors

app.command(name="analyze-kl")(analyze_kl)
app.command()(exponent)
app.command(name="place-anchors")(place_anchors)

# Traces
from fpsim.cli.trace import evaluate_trace_cmd, ingest_trace_cmd

app.command(name="ingest-trace")(ingest_trace_cmd)
app.command(name="evaluate-trace")(evaluate_trace_cmd)


if __name__ == "__main__":
    app()

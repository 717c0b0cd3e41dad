"""Analyze-kl command: divergence level fields over the region."""

from pathlib import Path
from typing import Optional

import typer

from fpsim.analysis.divergence import Scenario, level_field
from fpsim.errors import InvalidParameterError
from fpsim.harness.config import load_config
from fpsim.output.formatter import console, write_csv
from fpsim.propagation.base import AnalyticChannelParams, ChannelKind
from fpsim.session.log import RunLog
from .common import parse_floats, reported_errors

FIELDS = ("level", "approx")
KL_HEADER = ("x", "y", "value")


def analyze_kl(
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="Experiment YAML file"),
    field: str = typer.Option("approx", "--field", "-f", help="Field: level (needs --e), approx"),
    e: Optional[str] = typer.Option(None, "--e", help="Displacement 'dx,dy' in meters for --field level"),
    resolution: float = typer.Option(0.5, "--resolution", "-r", help="Raster cell size (m)"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Write the CSV here"),
) -> None:
    """Raster of the divergence between u and u + e, or its displacement-free proxy."""
    with reported_errors():
        if field not in FIELDS:
            raise InvalidParameterError(f"Unknown field '{field}'. Valid: {', '.join(FIELDS)}")
        displacement = None
        if field == "level":
            if e is None:
                raise InvalidParameterError("--field level needs --e dx,dy")
            displacement = parse_floats(e, "--e")
            if len(displacement) != 2:
                raise InvalidParameterError(f"--e takes two numbers, got {e!r}")

        cfg = load_config(config)
        scen = Scenario(
            tuple(cfg.base_anchors()),
            AnalyticChannelParams(
                alpha=cfg.alpha,
                noise_floor=cfg.noise_floor,
                quant_noise_var=cfg.quant_noise_var,
                model=ChannelKind.NOISY,
            ),
        )
        centers, values = level_field(cfg.region(), resolution, scen, displacement)
        rows = [(float(x), float(y), float(v)) for (x, y), v in zip(centers, values)]
        write_csv(KL_HEADER, rows, out)
        if out is not None:
            console.print(f"[green]{len(rows)} cells, max {values.max():.4g}, min {values.min():.4g}[/green]")

    RunLog().record_run("analyze-kl", cfg, config=config, field=field, e=e, resolution=resolution, out=out)

"""Spatial-map command: mean error per raster cell."""

from pathlib import Path
from typing import Optional

import typer

from fpsim.harness.config import load_config
from fpsim.harness.runner import SPATIAL_HEADER, ExperimentRunner
from fpsim.output.formatter import console, write_csv
from fpsim.session.log import RunLog
from .common import reported_errors


def spatial_map(
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="Experiment YAML file"),
    resolution: float = typer.Option(0.5, "--resolution", "-r", help="Raster cell size (m)"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Master seed (overrides run.seed)"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Write the CSV here"),
    threads: int = typer.Option(1, "--threads", "-t", min=1, help="Worker threads"),
) -> None:
    """Mean localization error at every raster cell center (x,y,mean_error)."""
    with reported_errors():
        cfg = load_config(config, seed=seed)
        result = ExperimentRunner(cfg, threads).spatial_map(resolution)
        write_csv(SPATIAL_HEADER, result.rows(), out)
        if out is not None:
            console.print(
                f"[green]{len(result.centers)} cells, {len(result.anchors)} anchors, "
                f"worst mean error {result.mean_error.max():.3f} m[/green]"
            )

    RunLog().record_run("spatial-map", cfg, config=config, resolution=resolution, out=out)

"""Place-anchors command: where to add access points."""

from pathlib import Path
from typing import Optional

import typer

from fpsim.harness.config import load_config
from fpsim.output.formatter import print_table, write_csv
from fpsim.placement.planner import place_new_anchors
from fpsim.session.log import RunLog
from .common import reported_errors

PLACEMENT_HEADER = ("step", "x", "y", "min_dist")


def place_anchors(
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="Experiment YAML file"),
    count: int = typer.Option(2, "--count", "-n", help="Anchors to add"),
    method: str = typer.Option("voronoi", "--method", "-m", help="Method: voronoi, random"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Placement seed (overrides placement.seed)"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Write the CSV here"),
) -> None:
    """Choose new anchor locations for the configured region and anchors."""
    with reported_errors():
        cfg = load_config(config, placement_seed=seed)
        plan = place_new_anchors(cfg.base_anchors(), cfg.region(), count, method, cfg.placement_seed)
        rows = [
            (step + 1, p.x, p.y, d)
            for step, (p, d) in enumerate(zip(plan.added, plan.min_distances))
        ]
        write_csv(PLACEMENT_HEADER, rows, out)
        if out is not None:
            print_table(f"Added anchors ({plan.method.value})", PLACEMENT_HEADER, rows)

    RunLog().record_run("place-anchors", cfg, config=config, count=count, method=method, out=out)

"""Trace commands: ingest a measurement trace, evaluate against one."""

from pathlib import Path
from typing import Optional

import typer

from fpsim.fingerprinting.database import DATABASE_HEADER, database_to_csv
from fpsim.fingerprinting.matcher import DEFAULT_K
from fpsim.fingerprinting.stats import STATS_COLUMNS
from fpsim.harness.traces import EVALUATION_HEADER, evaluate_on_trace, ingest_trace
from fpsim.output.formatter import console, print_table, write_csv
from fpsim.session.log import RunLog
from .common import reported_errors


def ingest_trace_cmd(
    path: Path = typer.Argument(..., help="Trace CSV (loc_id,x,y,ap_id,rss_dbm,sample_idx)"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Write the database CSV here"),
) -> None:
    """Build a training database from a trace and print it as CSV."""
    with reported_errors():
        grid, db = ingest_trace(path)
        text = database_to_csv(db)
        if out is None:
            typer.echo(text, nl=False)
        else:
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_text(text)
            console.print(
                f"[green]{len(grid)} locations x {db.n_anchors} APs "
                f"({', '.join(DATABASE_HEADER)}) -> {out}[/green]"
            )

    RunLog().record("ingest-trace", path=path, out=out)


def evaluate_trace_cmd(
    train: Path = typer.Argument(..., help="Training trace CSV"),
    evaluation: Path = typer.Argument(..., help="Evaluation trace CSV"),
    k: int = typer.Option(DEFAULT_K, "--k", "-k", help="Neighbors"),
    weighted: bool = typer.Option(False, "--weighted", help="Inverse-distance weighting"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Write per-location rows here"),
) -> None:
    """Localize every evaluation location and report its error."""
    with reported_errors():
        result = evaluate_on_trace(train, evaluation, k, weighted)
        write_csv(EVALUATION_HEADER, result.rows, out)
        if out is not None:
            print_table("Trace error (m)", STATS_COLUMNS, [result.stats.to_row()])
            if result.flagged:
                console.print(f"[yellow]{len(result.flagged)} location(s) heard no AP[/yellow]")

    RunLog().record("evaluate-trace", train=train, evaluation=evaluation, k=k, out=out)

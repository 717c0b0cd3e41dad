"""Simulate command: Monte Carlo localization sweeps."""

from pathlib import Path
from typing import Optional

import typer

from fpsim.errors import ConfigError
from fpsim.harness.config import load_config, save_config
from fpsim.harness.runner import RAW_HEADER, SUMMARY_HEADER, ExperimentRunner
from fpsim.output.formatter import console, print_table, write_csv
from fpsim.session.log import RunLog
from .common import reported_errors


def raw_path_for(out: Path) -> Path:
    return out.with_name(f"{out.stem}.raw.csv")


def simulate(
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="Experiment YAML file"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Master seed (overrides run.seed)"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Write the summary CSV here"),
    threads: int = typer.Option(1, "--threads", "-t", min=1, help="Worker threads"),
    raw: bool = typer.Option(False, "--raw", help="Also write per-trial errors (needs --out)"),
    dump_config: Optional[Path] = typer.Option(
        None, "--dump-config", help="Write the effective configuration and exit"
    ),
) -> None:
    """Run an experiment and print per-sweep-value error statistics."""
    with reported_errors():
        cfg = load_config(config, seed=seed)
        if dump_config is not None:
            save_config(cfg, dump_config)
            console.print(f"[green]Wrote configuration to {dump_config}[/green]")
            return
        if raw and out is None:
            raise ConfigError("--raw requires --out")

        result = ExperimentRunner(cfg, threads).run()
        rows = result.summary_rows()
        write_csv(SUMMARY_HEADER, rows, out)
        if out is not None:
            print_table(f"Localization error (m), seed {cfg.seed}", SUMMARY_HEADER, rows)
            if raw:
                write_csv(RAW_HEADER, result.raw_rows(), raw_path_for(out))

    RunLog().record_run(
        "simulate",
        cfg,
        config=config,
        trials=cfg.trials,
        sweep=cfg.sweep_name,
        out=out,
    )

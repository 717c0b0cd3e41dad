"""Exponent command: Monte Carlo error exponents of binary tests."""

from pathlib import Path
from typing import Optional

import typer

from fpsim.analysis.divergence import DiscreteDistribution
from fpsim.analysis.exponent import (
    MIN_TRIALS,
    ExponentEstimate,
    MapTest,
    NeymanPearsonTest,
    TypicalSetTest,
    estimate_error_exponent,
)
from fpsim.errors import InvalidParameterError
from fpsim.output.formatter import format_csv, print_table
from fpsim.session.log import RunLog
from .common import parse_floats, parse_ints, reported_errors

TESTS = ("typical", "np", "map")
POINTS_HEADER = ("n", "hits", "trials", "log_error")
FIT_HEADER = ("slope", "stderr", "theory_value")


def exponent_csv(estimate: ExponentEstimate) -> str:
    """Per-n rows, a blank line, then the fitted slope."""
    return (
        format_csv(POINTS_HEADER, estimate.to_rows())
        + "\n"
        + format_csv(FIT_HEADER, [(estimate.slope, estimate.slope_stderr, estimate.theory_value)])
    )


def exponent(
    p1: str = typer.Option("0.6,0.4", "--p1", help="Law at location 1, e.g. '0.6,0.4'"),
    p2: str = typer.Option("0.4,0.6", "--p2", help="Law at location 2"),
    test: str = typer.Option("typical", "--test", help="Test: typical, np, map"),
    epsilon: float = typer.Option(0.01, "--epsilon", help="Typical-set slack"),
    gamma: float = typer.Option(0.0, "--gamma", help="Neyman-Pearson threshold"),
    prior: float = typer.Option(0.5, "--prior", help="MAP prior of location 1"),
    n_values: str = typer.Option("20,40,60,80,100,120", "--n-values", help="Batch sizes"),
    trials: int = typer.Option(MIN_TRIALS, "--trials", help="Batches per n"),
    sampler: str = typer.Option("tilted", "--sampler", help="Sampler: tilted, direct"),
    seed: int = typer.Option(0, "--seed", help="Master seed"),
    threads: int = typer.Option(1, "--threads", "-t", min=1, help="Worker threads"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Write the CSV here"),
) -> None:
    """Estimate an error exponent and compare it with its theoretical value."""
    with reported_errors():
        law1 = DiscreteDistribution(parse_floats(p1, "--p1"))
        law2 = DiscreteDistribution(parse_floats(p2, "--p2"))
        if test == "typical":
            chosen = TypicalSetTest(epsilon)
        elif test == "np":
            chosen = NeymanPearsonTest(gamma)
        elif test == "map":
            chosen = MapTest(prior)
        else:
            raise InvalidParameterError(f"Unknown test '{test}'. Valid: {', '.join(TESTS)}")

        estimate = estimate_error_exponent(
            law1, law2, chosen, parse_ints(n_values, "--n-values"), trials, seed, threads, sampler
        )
        text = exponent_csv(estimate)
        if out is None:
            typer.echo(text, nl=False)
        else:
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_text(text)
            print_table(
                f"{test} test exponent",
                FIT_HEADER,
                [(estimate.slope, estimate.slope_stderr, estimate.theory_value)],
            )

    RunLog().record("exponent", test=test, trials=trials, seed=seed, sampler=sampler, out=out)

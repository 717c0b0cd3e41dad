"""Monte Carlo estimation of test error exponents.

A batch of ``n`` i.i.d. symbols enters every test only through its symbol
counts, so batches are drawn as multinomial count vectors. Two samplers are
available:

``direct``
    Draw under the hypothesis whose error is measured and count errors.
``tilted``
    Draw from the geometric mixture of the two hypotheses that puts the
    statistic at the edge of the error region, and reweight each batch by
    its likelihood ratio. The estimate is unbiased and stays measurable at
    error probabilities far below ``1 / trials``.

Trials are split into fixed-size chunks, each with its own random stream
derived from ``(master_seed, n, chunk)``. Results do not depend on how many
threads process the chunks.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.special import logsumexp
from scipy.stats import linregress

from fpsim.errors import InsufficientDataError, InvalidParameterError
from fpsim.rng import chunk_sizes, derive_rng, parallel_map
from .divergence import (
    DiscreteDistribution,
    chernoff_information,
    kl_discrete,
    np_exponent,
    np_tilt,
    tilted_distribution,
)
from .hypothesis import log_ratio

logger = logging.getLogger(__name__)

MIN_TRIALS = 10_000
MIN_POINTS = 5
CHUNK = 4096
SAMPLERS = ("tilted", "direct")


@dataclass(frozen=True)
class TypicalSetTest:
    """Stein-regime test; error is acceptance of the typical set under p2."""
    epsilon: float

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise InvalidParameterError(f"epsilon must be positive, got {self.epsilon}")


@dataclass(frozen=True)
class NeymanPearsonTest:
    """Threshold test on T_n; error is announcing location1 under p2."""
    gamma: float = 0.0


@dataclass(frozen=True)
class MapTest:
    """Bayes test with prior ``prior1`` on location1; error is the Bayes risk."""
    prior1: float = 0.5

    def __post_init__(self) -> None:
        if not 0 < self.prior1 < 1:
            raise InvalidParameterError(f"prior1 must be in (0, 1), got {self.prior1}")

    def threshold(self, n: int) -> float:
        return math.log((1 - self.prior1) / self.prior1) / n


HypothesisTest = Union[TypicalSetTest, NeymanPearsonTest, MapTest]


@dataclass
class ExponentEstimate:
    """Per-n error estimates and the fitted exponent.

    ``slope`` is the least-squares slope of ``-log_error`` against ``n``.
    ``hits`` counts the sampled batches that fell in an error region. Under
    ``direct`` sampling that is the number of errors; under ``tilted``
    sampling it is the number of reweighted terms, and a MAP test hits on
    every batch.
    """
    n_values: list[int]
    log_error: list[float]
    slope: float
    slope_stderr: float
    hits: list[int] = field(default_factory=list)
    trials: int = 0
    theory_value: float = float("nan")
    dropped: list[int] = field(default_factory=list)

    def to_rows(self) -> list[tuple[int, int, int, float]]:
        return [(n, e, self.trials, le) for n, e, le in zip(self.n_values, self.hits, self.log_error)]


def theoretical_exponent(p1: DiscreteDistribution, p2: DiscreteDistribution, test: HypothesisTest) -> float:
    if isinstance(test, TypicalSetTest):
        return kl_discrete(p1, p2)
    if isinstance(test, NeymanPearsonTest):
        return np_exponent(p1, p2, test.gamma)
    return chernoff_information(p1, p2)


def _proposal(
    p1: DiscreteDistribution,
    p2: DiscreteDistribution,
    test: HypothesisTest,
    sampler: str,
) -> DiscreteDistribution:
    if sampler == "direct":
        return p2
    if isinstance(test, TypicalSetTest):
        d = kl_discrete(p1, p2)
        edge = max(d - test.epsilon, -kl_discrete(p2, p1))
        return tilted_distribution(p1, p2, np_tilt(p1, p2, edge))
    if isinstance(test, NeymanPearsonTest):
        return tilted_distribution(p1, p2, np_tilt(p1, p2, test.gamma))
    return tilted_distribution(p1, p2, np_tilt(p1, p2, 0.0))


def _log_weights(counts: np.ndarray, target: DiscreteDistribution, proposal: DiscreteDistribution) -> np.ndarray:
    """Per-batch ``log P_target(batch) / P_proposal(batch)``."""
    ratio = log_ratio(target, proposal)
    used = counts.sum(axis=0) > 0
    return counts[:, used] @ ratio[used]


@dataclass
class _ChunkResult:
    log_terms: list[np.ndarray]
    hits: int


def _run_chunk(
    p1: DiscreteDistribution,
    p2: DiscreteDistribution,
    test: HypothesisTest,
    sampler: str,
    n: int,
    size: int,
    rng: np.random.Generator,
) -> _ChunkResult:
    llr = log_ratio(p1, p2)

    def statistic(counts: np.ndarray) -> np.ndarray:
        used = counts.sum(axis=0) > 0
        return counts[:, used] @ llr[used] / n

    if isinstance(test, MapTest):
        pi1 = test.prior1
        gamma = test.threshold(n)
        if sampler == "direct":
            c1 = rng.multinomial(n, p1.probs, size=size)
            c2 = rng.multinomial(n, p2.probs, size=size)
            miss1 = statistic(c1) <= gamma
            miss2 = statistic(c2) > gamma
            zeros1 = np.zeros(int(miss1.sum()))
            zeros2 = np.zeros(int(miss2.sum()))
            return _ChunkResult(
                [zeros1 + math.log(pi1), zeros2 + math.log(1 - pi1)],
                int(miss1.sum() + miss2.sum()),
            )
        q = _proposal(p1, p2, test, sampler)
        counts = rng.multinomial(n, q.probs, size=size)
        t_n = statistic(counts)
        miss1 = t_n <= gamma
        miss2 = ~miss1
        w1 = _log_weights(counts[miss1], p1, q) + math.log(pi1)
        w2 = _log_weights(counts[miss2], p2, q) + math.log(1 - pi1)
        return _ChunkResult([w1, w2], size)

    q = _proposal(p1, p2, test, sampler)
    counts = rng.multinomial(n, q.probs, size=size)
    t_n = statistic(counts)
    if isinstance(test, TypicalSetTest):
        hit = np.abs(t_n - kl_discrete(p1, p2)) <= test.epsilon
    else:
        hit = t_n > test.gamma
    weights = np.zeros(int(hit.sum())) if sampler == "direct" else _log_weights(counts[hit], p2, q)
    return _ChunkResult([weights], int(hit.sum()))


def estimate_error_exponent(
    p1: DiscreteDistribution,
    p2: DiscreteDistribution,
    test: HypothesisTest,
    n_values: Sequence[int],
    trials: int,
    master_seed: int,
    threads: int = 1,
    sampler: str = "tilted",
) -> ExponentEstimate:
    """Estimate error probabilities over ``n_values`` and fit their exponent.

    Parameters
    ----------
    p1, p2:
        Observation laws at location1 and location2.
    test:
        :class:`TypicalSetTest`, :class:`NeymanPearsonTest` or :class:`MapTest`.
    n_values:
        Batch sizes; at least five must yield a nonzero error estimate.
    trials:
        Batches per n (at least ``MIN_TRIALS``).
    master_seed:
        Root of all random streams.
    threads:
        Worker threads; does not change the result.
    sampler:
        ``"tilted"`` (importance sampling) or ``"direct"``.
    """
    if trials < MIN_TRIALS:
        raise InvalidParameterError(f"trials must be >= {MIN_TRIALS}, got {trials}")
    if sampler not in SAMPLERS:
        raise InvalidParameterError(f"Unknown sampler '{sampler}'. Valid: {', '.join(SAMPLERS)}")
    n_values = sorted(int(n) for n in n_values)
    if any(n < 1 for n in n_values):
        raise InvalidParameterError("n-values must be >= 1")

    jobs = [
        (n, c, size)
        for n in n_values
        for c, size in enumerate(chunk_sizes(trials, CHUNK))
    ]

    def run(job: tuple[int, int, int]) -> _ChunkResult:
        n, c, size = job
        return _run_chunk(p1, p2, test, sampler, n, size, derive_rng(master_seed, "exponent", n, c))

    results = parallel_map(run, jobs, threads)

    kept_n: list[int] = []
    kept_log: list[float] = []
    kept_hits: list[int] = []
    dropped: list[int] = []
    for n in n_values:
        parts = [r for (jn, _, _), r in zip(jobs, results) if jn == n]
        terms = np.concatenate([t for r in parts for t in r.log_terms])
        hits = sum(r.hits for r in parts)
        if terms.size == 0:
            logger.warning("No errors observed at n=%d over %d trials; dropping it from the fit", n, trials)
            dropped.append(n)
            continue
        kept_n.append(n)
        kept_log.append(float(logsumexp(terms) - math.log(trials)))
        kept_hits.append(hits)

    if len(kept_n) < MIN_POINTS:
        raise InsufficientDataError(
            f"Only {len(kept_n)} n-values had observed errors; need at least {MIN_POINTS}"
        )

    fit = linregress(np.array(kept_n, dtype=float), -np.array(kept_log))
    return ExponentEstimate(
        n_values=kept_n,
        log_error=kept_log,
        slope=float(fit.slope),
        slope_stderr=float(fit.stderr),
        hits=kept_hits,
        trials=trials,
        theory_value=theoretical_exponent(p1, p2, test),
        dropped=dropped,
    )

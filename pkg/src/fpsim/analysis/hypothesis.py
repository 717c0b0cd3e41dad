"""Empirical distributions, likelihood-ratio statistics and simple tests."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from fpsim.errors import DomainError, InvalidInputError, InvalidParameterError
from fpsim.rng import derive_rng
from .divergence import DiscreteDistribution, kl_discrete


class Decision(str, Enum):
    LOCATION1 = "location1"
    LOCATION2 = "location2"


class Membership(str, Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class SampleBatch:
    """Observed symbol indices ``X_1..X_n``."""
    samples: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", tuple(int(s) for s in self.samples))
        if any(s < 0 for s in self.samples):
            raise InvalidInputError("Sample indices must be non-negative")

    @classmethod
    def draw(cls, p: DiscreteDistribution, n: int, rng: np.random.Generator) -> SampleBatch:
        return cls(tuple(rng.choice(p.alphabet_size, size=n, p=p.probs)))

    @property
    def n(self) -> int:
        return len(self.samples)

    def counts(self, alphabet_size: int) -> np.ndarray:
        if self.samples and max(self.samples) >= alphabet_size:
            raise InvalidInputError(
                f"Sample index {max(self.samples)} outside alphabet of size {alphabet_size}"
            )
        return np.bincount(np.asarray(self.samples, dtype=np.int64), minlength=alphabet_size)


def empirical_distribution(batch: SampleBatch, alphabet_size: int) -> DiscreteDistribution:
    """Normalized symbol counts."""
    if batch.n == 0:
        raise InvalidParameterError("Empirical distribution of an empty batch")
    return DiscreteDistribution.from_counts(batch.counts(alphabet_size))


def log_ratio(p1: DiscreteDistribution, p2: DiscreteDistribution) -> np.ndarray:
    """Per-symbol ``log p1/p2``; nan where either probability is 0."""
    if p1.alphabet_size != p2.alphabet_size:
        raise InvalidInputError("Distributions have different alphabets")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.log(p1.probs) - np.log(p2.probs)
    ratio[(p1.probs == 0) | (p2.probs == 0)] = np.nan
    return ratio


def llr_statistic(batch: SampleBatch, p1: DiscreteDistribution, p2: DiscreteDistribution) -> float:
    """Normalized log-likelihood ratio ``(1/n) sum log p1(x)/p2(x)``."""
    if batch.n == 0:
        raise InvalidParameterError("Log-likelihood ratio of an empty batch")
    counts = batch.counts(p1.alphabet_size)
    ratio = log_ratio(p1, p2)
    observed = counts > 0
    if np.isnan(ratio[observed]).any():
        raise DomainError("Observed a symbol with zero probability under one hypothesis")
    return float(counts[observed] @ ratio[observed] / batch.n)


def np_decide(t_n: float, gamma: float) -> Decision:
    """Announce location1 only when the statistic strictly exceeds the threshold."""
    return Decision.LOCATION1 if t_n > gamma else Decision.LOCATION2


def typical_set_test(
    batch: SampleBatch,
    p1: DiscreteDistribution,
    p2: DiscreteDistribution,
    epsilon: float,
) -> Membership:
    """Inside iff ``|(1/n) sum log p2/p1 + KL(p1||p2)| <= epsilon``."""
    if not epsilon > 0:
        raise InvalidParameterError(f"epsilon must be positive, got {epsilon}")
    stat = -llr_statistic(batch, p1, p2)
    return Membership.INSIDE if abs(stat + kl_discrete(p1, p2)) <= epsilon else Membership.OUTSIDE


def hoeffding_bound(n: int, a: float) -> float:
    """``2 exp(-2 n a**2)`` bound on ``P(|Q_n(x) - P(x)| >= a)``."""
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    if not a > 0:
        raise InvalidParameterError(f"a must be positive, got {a}")
    return 2.0 * math.exp(-2.0 * n * a * a)


def empirical_deviation_frequency(
    p: DiscreteDistribution,
    n: int,
    a: float,
    trials: int,
    master_seed: int,
) -> np.ndarray:
    """Per symbol, the fraction of trials with ``|Q_n(x) - P(x)| >= a``."""
    if trials < 1:
        raise InvalidParameterError(f"trials must be >= 1, got {trials}")
    rng = derive_rng(master_seed, "hoeffding", n, repr(a))
    counts = rng.multinomial(n, p.probs, size=trials)
    deviation = np.abs(counts / n - p.probs[None, :])
    return (deviation >= a - 1e-12).mean(axis=0)

"""Region-versus-location divergences and the critical-region test."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.stats import expon, norm

from fpsim.errors import InvalidInputError, InvalidParameterError
from fpsim.geometry.base import Point, points_to_array
from fpsim.propagation.base import ChannelKind, anchor_powers
from .divergence import (
    DiscreteDistribution,
    Scenario,
    inverse_path_power,
    kl_discrete,
    kl_fading_rss,
    kl_gaussian_rss_array,
)

DEFAULT_BINS = 64
PROB_FLOOR = 1e-12


class RegionDecision(str, Enum):
    IN_REGION = "in_region"
    OUT_OF_REGION = "out_of_region"


def region_kl(region_samples: Sequence[Point] | np.ndarray, u2: Point, scen: Scenario) -> float:
    """Smallest model divergence from any sampled region location to ``u2``."""
    pts = points_to_array(region_samples)
    if len(pts) == 0:
        raise InvalidInputError("region_kl needs at least one region sample")
    if scen.params.model == ChannelKind.NOISY:
        target = np.repeat(points_to_array([u2]), len(pts), axis=0)
        return float(kl_gaussian_rss_array(pts, target, scen).min())
    return min(kl_fading_rss(Point(float(x), float(y)), u2, scen) for x, y in pts)


@dataclass(frozen=True)
class Quantizer:
    """Per-anchor uniform bins; the outermost bins are open-ended."""
    edges: tuple[np.ndarray, ...]

    @classmethod
    def from_observations(cls, samples: np.ndarray, bins: int = DEFAULT_BINS) -> Quantizer:
        """Bins spanning the observed range of each anchor's samples."""
        if bins < 2:
            raise InvalidParameterError(f"bins must be >= 2, got {bins}")
        samples = np.atleast_2d(np.asarray(samples, dtype=float))
        edges = []
        for column in samples.T:
            lo, hi = float(column.min()), float(column.max())
            if hi - lo <= 0:
                pad = 1e-6 * max(1.0, abs(lo))
                lo, hi = lo - pad, hi + pad
            edges.append(np.linspace(lo, hi, bins + 1)[1:-1])
        return cls(tuple(edges))

    @property
    def alphabet_sizes(self) -> list[int]:
        return [len(e) + 1 for e in self.edges]

    def empirical(self, samples: np.ndarray) -> list[DiscreteDistribution]:
        samples = np.atleast_2d(np.asarray(samples, dtype=float))
        if samples.shape[1] != len(self.edges):
            raise InvalidInputError(
                f"Expected {len(self.edges)} anchor columns, got {samples.shape[1]}"
            )
        out = []
        for j, edges in enumerate(self.edges):
            idx = np.searchsorted(edges, samples[:, j], side="right")
            out.append(DiscreteDistribution.from_counts(np.bincount(idx, minlength=len(edges) + 1)))
        return out

    def model_pmfs(self, u: np.ndarray, scen: Scenario) -> list[DiscreteDistribution]:
        """Bin probabilities of each anchor's RSS law at location ``u``."""
        loc = np.asarray(u, dtype=float).reshape(1, 2)
        gain = anchor_powers(scen.anchors) * inverse_path_power(loc, scen)[0]
        floor = scen.params.noise_floor
        out = []
        for j, edges in enumerate(self.edges):
            if scen.params.model == ChannelKind.NOISY:
                cdf = norm.cdf(edges, loc=gain[j] + floor, scale=math.sqrt(scen.params.quant_noise_var))
            else:
                cdf = expon.cdf(edges - floor, scale=gain[j])
            probs = np.diff(np.concatenate([[0.0], cdf, [1.0]]))
            probs = np.maximum(probs, PROB_FLOOR)
            out.append(DiscreteDistribution(probs / probs.sum()))
        return out


def critical_threshold(n: int, alphabet_size: int, c: float = 1.0) -> float:
    """``delta_n = c * |X| * log(n + 1) / n``."""
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    return c * alphabet_size * math.log(n + 1) / n


def critical_region_decision(
    empirical: Sequence[DiscreteDistribution],
    candidates: Sequence[Sequence[DiscreteDistribution]],
    n: int,
    c: float = 1.0,
) -> RegionDecision:
    """Out of region iff every candidate is at least ``delta_n`` from the empirical law.

    Divergences of per-anchor marginals add; the alphabet size in
    ``delta_n`` is the total number of per-anchor symbols.
    """
    if not candidates:
        raise InvalidInputError("critical region test needs at least one candidate location")
    size = sum(q.alphabet_size for q in empirical)
    delta = critical_threshold(n, size, c)
    best = min(sum(kl_discrete(q, p) for q, p in zip(empirical, model)) for model in candidates)
    return RegionDecision.OUT_OF_REGION if best >= delta else RegionDecision.IN_REGION


def region_test(
    batch: np.ndarray,
    region_samples: Sequence[Point] | np.ndarray,
    scen: Scenario,
    n: int | None = None,
    bins: int = DEFAULT_BINS,
    c: float = 1.0,
) -> RegionDecision:
    """Decide whether ``n`` RSS observations (rows of ``batch``) come from the region.

    The observations are quantized to ``bins`` uniform bins per anchor over
    their observed range and compared with the quantized model law at each
    sampled region location.
    """
    batch = np.atleast_2d(np.asarray(batch, dtype=float))
    n = len(batch) if n is None else n
    if n != len(batch):
        raise InvalidInputError(f"batch holds {len(batch)} observations, expected {n}")
    pts = points_to_array(region_samples)
    if len(pts) == 0:
        raise InvalidInputError("region_test needs at least one region sample")
    quantizer = Quantizer.from_observations(batch, bins)
    empirical = quantizer.empirical(batch)
    candidates = [quantizer.model_pmfs(u, scen) for u in pts]
    return critical_region_decision(empirical, candidates, n, c)

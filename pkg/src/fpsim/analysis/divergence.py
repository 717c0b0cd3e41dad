"""Divergences between location hypotheses.

Closed-form KL divergences for the linear-power RSS models, the level
fields used to judge anchor layouts, the spatial robustness bound, and the
discrete information measures (KL, total variation, Chernoff information,
Sanov exponents) that govern the error exponents of the tests in
:mod:`fpsim.analysis.hypothesis`. All values are in nats.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import logsumexp

from fpsim.errors import DomainError, InvalidInputError, InvalidParameterError, UnsupportedSizeError
from fpsim.geometry.base import Point, Region, points_to_array
from fpsim.geometry.labelmap import raster_centers
from fpsim.propagation.analytic import LINEAR_DISTANCE_CLAMP
from fpsim.propagation.base import (
    AnalyticChannelParams,
    Anchor,
    ChannelKind,
    anchor_coords,
    anchor_distances,
    anchor_powers,
)

SANOV_MAX_ALPHABET = 4
SANOV_GRID_STEPS = 200
CHERNOFF_GRID_STEPS = 1000
CHERNOFF_TOL = 1e-8


@dataclass(frozen=True)
class DiscreteDistribution:
    """Probability mass function over ``{0, ..., alphabet_size - 1}``."""
    probs: np.ndarray = field(repr=True)

    def __post_init__(self) -> None:
        probs = np.array(self.probs, dtype=float).ravel()
        if probs.size == 0:
            raise InvalidInputError("A distribution needs at least one symbol")
        if not np.all(np.isfinite(probs)) or (probs < 0).any():
            raise InvalidParameterError("Probabilities must be finite and non-negative")
        total = probs.sum()
        if abs(total - 1.0) > 1e-9:
            raise InvalidParameterError(f"Probabilities must sum to 1, got {total}")
        probs = probs / total
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def bernoulli(cls, theta: float) -> DiscreteDistribution:
        """Two-symbol pmf with P(1) = theta."""
        return cls(np.array([1.0 - theta, theta]))

    @classmethod
    def from_counts(cls, counts: Sequence[int] | np.ndarray) -> DiscreteDistribution:
        counts = np.asarray(counts, dtype=float)
        if counts.sum() <= 0:
            raise InvalidInputError("Counts must contain at least one observation")
        return cls(counts / counts.sum())

    @property
    def alphabet_size(self) -> int:
        return int(self.probs.size)

    @property
    def support(self) -> np.ndarray:
        return self.probs > 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DiscreteDistribution):
            return NotImplemented
        return self.alphabet_size == other.alphabet_size and bool(np.array_equal(self.probs, other.probs))

    def __hash__(self) -> int:
        return hash(self.probs.tobytes())


@dataclass(frozen=True)
class Scenario:
    """Anchors plus the analytic channel they transmit over."""
    anchors: tuple[Anchor, ...]
    params: AnalyticChannelParams

    def __post_init__(self) -> None:
        object.__setattr__(self, "anchors", tuple(self.anchors))
        if not self.anchors:
            raise InvalidParameterError("A scenario needs at least one anchor")


def _require(scen: Scenario, kind: ChannelKind) -> None:
    if scen.params.model != kind:
        raise InvalidParameterError(f"Expected a {kind.value} channel, got {scen.params.model.value}")


def inverse_path_power(points: np.ndarray, scen: Scenario) -> np.ndarray:
    """(N, K) array of ``1 / d**alpha``."""
    d = anchor_distances(points, scen.anchors, LINEAR_DISTANCE_CLAMP)
    return d ** (-scen.params.alpha)


def _same_alphabet(p: DiscreteDistribution, q: DiscreteDistribution) -> None:
    if p.alphabet_size != q.alphabet_size:
        raise InvalidInputError(
            f"Distributions have different alphabets ({p.alphabet_size} vs {q.alphabet_size})"
        )


# ----------------------------------------------------------------------
# RSS model divergences
# ----------------------------------------------------------------------


def kl_gaussian_rss_array(u1: np.ndarray, u2: np.ndarray, scen: Scenario) -> np.ndarray:
    """Vectorized :func:`kl_gaussian_rss` over paired (N, 2) location arrays."""
    _require(scen, ChannelKind.NOISY)
    weight = anchor_powers(scen.anchors) ** 2 / (2.0 * scen.params.quant_noise_var)
    delta = inverse_path_power(u1, scen) - inverse_path_power(u2, scen)
    return (weight[None, :] * delta ** 2).sum(axis=1)


def kl_gaussian_rss(u1: Point, u2: Point, scen: Scenario) -> float:
    """KL divergence between the Gaussian RSS laws at two locations.

    Both locations share the noise variance, so only the mean shift
    contributes: ``sum_j P_j**2 / (2 N) * (d1j**-a - d2j**-a)**2``.
    """
    return float(kl_gaussian_rss_array(points_to_array([u1]), points_to_array([u2]), scen)[0])


def kl_fading_rss(u1: Point, u2: Point, scen: Scenario) -> float:
    """Closed-form divergence for exponential (Rayleigh power) fading.

    ``sum_j alpha*log(r2/r1) + (r1/r2)**alpha - 1`` with ``r`` the anchor
    distances. Transmit power and the noise floor do not enter.
    """
    _require(scen, ChannelKind.FADING)
    r1 = anchor_distances(points_to_array([u1]), scen.anchors, LINEAR_DISTANCE_CLAMP)[0]
    r2 = anchor_distances(points_to_array([u2]), scen.anchors, LINEAR_DISTANCE_CLAMP)[0]
    a = scen.params.alpha
    return float(np.sum(a * np.log(r2 / r1) + (r1 / r2) ** a - 1.0))


def kl_monte_carlo(
    u1: Point,
    u2: Point,
    scen: Scenario,
    draws: int,
    rng: np.random.Generator,
) -> float:
    """Sample-mean log-likelihood ratio matching the closed forms above.

    Noisy channels draw under ``u1`` and average ``log p_u1/p_u2``. Fading
    channels (noise floor 0) draw under ``u2`` and average
    ``log p_u2/p_u1``, which is the quantity :func:`kl_fading_rss` computes.
    """
    if draws < 1:
        raise InvalidParameterError("draws must be >= 1")
    powers = anchor_powers(scen.anchors)
    g1 = powers * inverse_path_power(points_to_array([u1]), scen)[0]
    g2 = powers * inverse_path_power(points_to_array([u2]), scen)[0]
    if scen.params.model == ChannelKind.NOISY:
        var = scen.params.quant_noise_var
        x = g1[None, :] + rng.normal(0.0, math.sqrt(var), size=(draws, len(g1)))
        llr = ((x - g2) ** 2 - (x - g1) ** 2) / (2.0 * var)
    else:
        if scen.params.noise_floor != 0:
            raise InvalidParameterError("Fading Monte Carlo oracle needs noise_floor == 0")
        x = rng.exponential(1.0, size=(draws, len(g2))) * g2[None, :]
        llr = np.log(g1 / g2)[None, :] - x / g2 + x / g1
    return float(llr.sum(axis=1).mean())


def level_curve_value(u: Point, e: Sequence[float], scen: Scenario) -> float:
    """Divergence between ``u`` and ``u + e``."""
    return kl_gaussian_rss(u, u.shifted(float(e[0]), float(e[1])), scen)


def level_field_approx_array(points: np.ndarray, scen: Scenario) -> np.ndarray:
    d = anchor_distances(points, scen.anchors, LINEAR_DISTANCE_CLAMP)
    return (d ** (-(2.0 * scen.params.alpha + 2.0))).sum(axis=1)


def level_field_approx(u: Point, scen: Scenario) -> float:
    """Displacement-free sensitivity proxy ``sum_j 1 / |u - w_j|**(2 alpha + 2)``."""
    return float(level_field_approx_array(points_to_array([u]), scen)[0])


def level_field(
    region: Region,
    resolution: float,
    scen: Scenario,
    e: Sequence[float] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Raster of :func:`level_curve_value` (with ``e``) or :func:`level_field_approx`.

    Returns ``(centers, values)`` with centers in row-major raster order.
    """
    centers = raster_centers(region, resolution)
    if e is None:
        return centers, level_field_approx_array(centers, scen)
    shifted = centers + np.asarray(e, dtype=float)[None, :]
    return centers, kl_gaussian_rss_array(centers, shifted, scen)


def robustness_bound(L: float, D: float, alpha: float, P_T: float, N1: float) -> float:
    """Largest separation of two locations whose divergence is at most ``L``.

    ``D**(alpha+1) / (alpha * P_T) * sqrt(2 * N1 * L)`` for locations within
    distance ``D`` of the anchor.
    """
    if L < 0:
        raise InvalidParameterError(f"L must be >= 0, got {L}")
    if not (D > 0 and alpha > 0 and P_T > 0 and N1 > 0):
        raise InvalidParameterError("D, alpha, P_T and N1 must be positive")
    return D ** (alpha + 1) / (alpha * P_T) * math.sqrt(2.0 * N1 * L)


def _segment_distance(a: np.ndarray, b: np.ndarray, points: np.ndarray) -> np.ndarray:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0:
        t = np.zeros(len(points))
    else:
        t = np.clip(((points - a) @ ab) / denom, 0.0, 1.0)
    closest = a[None, :] + t[:, None] * ab[None, :]
    return np.hypot(*(points - closest).T)


def kl_gaussian_upper_bound(u1: Point, u2: Point, scen: Scenario) -> float:
    """Mean-value upper bound on :func:`kl_gaussian_rss`.

    Uses the exact minimum anchor distance over the segment ``u1``-``u2``.
    """
    _require(scen, ChannelKind.NOISY)
    a = scen.params.alpha
    p1 = np.array(u1.as_tuple())
    p2 = np.array(u2.as_tuple())
    dmin = np.maximum(_segment_distance(p1, p2, anchor_coords(scen.anchors)), LINEAR_DISTANCE_CLAMP)
    weight = a ** 2 * anchor_powers(scen.anchors) ** 2 / (2.0 * scen.params.quant_noise_var)
    sep2 = float(((p1 - p2) ** 2).sum())
    return float(np.sum(weight * sep2 / dmin ** (2 * a + 2)))


@dataclass(frozen=True)
class FadingNoiseGap:
    """Per-anchor terms comparing fading and additive-noise divergences."""
    fading: float
    comparison: float
    noisy: float

    @property
    def fading_dominates(self) -> bool:
        return self.fading >= self.comparison


def fading_noise_gap(u1: Point, u2: Point, anchor: Anchor, alpha: float) -> FadingNoiseGap:
    """Fading divergence term versus ``0.5 r1**(2a) (r1**-a - r2**-a)**2``.

    The nearer of the two locations is taken as ``u1``. ``noisy`` is the
    unscaled ``0.5 (r1**-a - r2**-a)**2`` term.
    """
    r1 = max(anchor.location.distance_to(u1), LINEAR_DISTANCE_CLAMP)
    r2 = max(anchor.location.distance_to(u2), LINEAR_DISTANCE_CLAMP)
    if r1 > r2:
        r1, r2 = r2, r1
    if r1 == r2:
        return FadingNoiseGap(0.0, 0.0, 0.0)
    delta = r1 ** (-alpha) - r2 ** (-alpha)
    return FadingNoiseGap(
        fading=alpha * math.log(r2 / r1) + (r1 / r2) ** alpha - 1.0,
        comparison=0.5 * r1 ** (2 * alpha) * delta ** 2,
        noisy=0.5 * delta ** 2,
    )


# ----------------------------------------------------------------------
# Discrete information measures
# ----------------------------------------------------------------------


def kl_discrete(p: DiscreteDistribution, q: DiscreteDistribution) -> float:
    """``sum p log(p/q)`` with ``0 log 0 = 0``; needs p absolutely continuous w.r.t. q."""
    _same_alphabet(p, q)
    mask = p.probs > 0
    if (q.probs[mask] == 0).any():
        raise DomainError("KL divergence undefined: q(x) = 0 where p(x) > 0")
    return float(np.sum(p.probs[mask] * np.log(p.probs[mask] / q.probs[mask])))


def tv_distance(p: DiscreteDistribution, q: DiscreteDistribution) -> float:
    _same_alphabet(p, q)
    return float(0.5 * np.abs(p.probs - q.probs).sum())


def _log_affinity(p: np.ndarray, q: np.ndarray, t: float) -> float:
    """``log sum p**(1-t) q**t`` over a common positive support."""
    return float(logsumexp((1.0 - t) * np.log(p) + t * np.log(q)))


def _common_support(p: DiscreteDistribution, q: DiscreteDistribution) -> tuple[np.ndarray, np.ndarray]:
    _same_alphabet(p, q)
    if not np.array_equal(p.support, q.support):
        raise DomainError("Chernoff information needs mutually absolutely continuous distributions")
    mask = p.support
    return p.probs[mask], q.probs[mask]


def chernoff_point(p: DiscreteDistribution, q: DiscreteDistribution) -> tuple[float, float]:
    """Minimizer ``t*`` in [0, 1] and the Chernoff information at it."""
    pp, qq = _common_support(p, q)
    if np.array_equal(pp, qq):
        return 0.5, 0.0
    ts = np.linspace(0.0, 1.0, CHERNOFF_GRID_STEPS + 1)
    values = np.array([_log_affinity(pp, qq, t) for t in ts])
    i = int(np.argmin(values))
    best_t, best_v = float(ts[i]), float(values[i])
    if 0 < i < len(ts) - 1 and values[i] < values[i - 1] and values[i] < values[i + 1]:
        res = minimize_scalar(
            lambda t: _log_affinity(pp, qq, t),
            bracket=(ts[i - 1], ts[i], ts[i + 1]),
            method="golden",
            tol=CHERNOFF_TOL,
        )
        if res.fun < best_v:
            best_t, best_v = float(res.x), float(res.fun)
    return best_t, max(0.0, -best_v)


def chernoff_information(p: DiscreteDistribution, q: DiscreteDistribution) -> float:
    """``-log min_t sum p**(1-t) q**t`` over t in [0, 1]."""
    return chernoff_point(p, q)[1]


def tilted_distribution(p1: DiscreteDistribution, p2: DiscreteDistribution, t: float) -> DiscreteDistribution:
    """Geometric mixture proportional to ``p1**(1-t) p2**t``."""
    pp, qq = _common_support(p1, p2)
    logw = (1.0 - t) * np.log(pp) + t * np.log(qq)
    probs = np.zeros(p1.alphabet_size)
    probs[p1.support] = np.exp(logw - logsumexp(logw))
    return DiscreteDistribution(probs)


def _mean_llr(p1: DiscreteDistribution, p2: DiscreteDistribution, t: float) -> float:
    pt = tilted_distribution(p1, p2, t)
    mask = p1.support
    return float(np.sum(pt.probs[mask] * np.log(p1.probs[mask] / p2.probs[mask])))


def np_tilt(p1: DiscreteDistribution, p2: DiscreteDistribution, gamma: float) -> float:
    """Tilt ``t`` in [0, 1] at which the expected log-likelihood ratio equals ``gamma``."""
    _common_support(p1, p2)
    if p1 == p2:
        return 0.0
    lo, hi = _mean_llr(p1, p2, 0.0), _mean_llr(p1, p2, 1.0)
    tol = 1e-12
    if gamma >= lo - tol:
        if gamma > lo + 1e-9:
            raise InvalidParameterError(f"threshold {gamma} exceeds KL(p1||p2) = {lo}")
        return 0.0
    if gamma <= hi + tol:
        if gamma < hi - 1e-9:
            raise InvalidParameterError(f"threshold {gamma} is below -KL(p2||p1) = {hi}")
        return 1.0
    return float(brentq(lambda t: _mean_llr(p1, p2, t) - gamma, 0.0, 1.0, xtol=1e-14))


def np_exponent(p1: DiscreteDistribution, p2: DiscreteDistribution, gamma: float) -> float:
    """Exponent of ``P_p2(T_n > gamma)``: ``KL(p_t || p2)`` at the matching tilt.

    ``gamma = 0`` gives the Chernoff information, ``gamma = KL(p1||p2)``
    gives the Stein exponent.
    """
    t = np_tilt(p1, p2, gamma)
    return kl_discrete(tilted_distribution(p1, p2, t), p2)


@lru_cache(maxsize=8)
def _simplex_grid(k: int, steps: int) -> np.ndarray:
    """All integer compositions of ``steps`` into ``k`` parts."""
    if k == 1:
        return np.array([[steps]], dtype=np.int32)
    blocks = []
    for first in range(steps + 1):
        rest = _simplex_grid(k - 1, steps - first)
        blocks.append(np.column_stack([np.full(len(rest), first, dtype=np.int32), rest]))
    return np.vstack(blocks)


def _kl_rows(q: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Row-wise KL(q || p); +inf where q leaves the support of p."""
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(q > 0, q * np.log(q / p[None, :]), 0.0)
    return terms.sum(axis=1)


def _boundary_point(p: np.ndarray, direction: np.ndarray, a: float) -> np.ndarray | None:
    """``p + a * v`` with ``v`` scaled to unit total variation; None if off-simplex."""
    tv = 0.5 * np.abs(direction).sum()
    if tv <= 0:
        return None
    q = p + a * direction / tv
    if (q < -1e-15).any():
        return None
    return np.clip(q, 0.0, None)


def sanov_exponent(p: DiscreteDistribution, a: float) -> float:
    """Large-deviation exponent of ``P(TV(Q_n, p) > a)``.

    Minimizes ``KL(q || p)`` over the boundary ``TV(q, p) = a``: every
    simplex grid point at distance at least ``a`` is pulled radially onto
    the boundary, then the best one is refined by a pairwise mass-transfer
    pattern search. Returns ``inf`` when no distribution is that far from p.
    """
    k = p.alphabet_size
    if k > SANOV_MAX_ALPHABET:
        raise UnsupportedSizeError(f"sanov_exponent supports alphabets up to {SANOV_MAX_ALPHABET}, got {k}")
    if not 0 < a < 1:
        raise InvalidParameterError(f"TV radius must be in (0, 1), got {a}")
    probs = p.probs

    grid = _simplex_grid(k, SANOV_GRID_STEPS) / SANOV_GRID_STEPS
    diff = grid - probs[None, :]
    tv = 0.5 * np.abs(diff).sum(axis=1)
    far = tv >= a - 1e-12
    if not far.any():
        return math.inf
    boundary = probs[None, :] + diff[far] * (a / tv[far])[:, None]
    boundary = np.clip(boundary, 0.0, None)
    values = _kl_rows(boundary, probs)
    best = int(np.argmin(values))
    if not np.isfinite(values[best]):
        return math.inf

    direction = diff[far][best] / tv[far][best]
    best_value = float(values[best])
    step = 1.0 / SANOV_GRID_STEPS
    pairs = [(i, j) for i, j in itertools.permutations(range(k), 2)]
    while step > 1e-10:
        improved = False
        for i, j in pairs:
            trial = direction.copy()
            trial[i] += step
            trial[j] -= step
            q = _boundary_point(probs, trial, a)
            if q is None:
                continue
            value = float(_kl_rows(q[None, :], probs)[0])
            if value < best_value - 1e-15:
                best_value = value
                direction = trial / (0.5 * np.abs(trial).sum())
                improved = True
        if not improved:
            step /= 2
    return best_value

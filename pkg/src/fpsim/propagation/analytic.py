"""Linear-power RSS models with additive Gaussian noise or exponential fading."""

from typing import Sequence

import numpy as np

from fpsim.errors import InvalidParameterError
from fpsim.geometry.base import Point, points_to_array
from .base import (
    AnalyticChannelParams,
    Anchor,
    ChannelKind,
    RssModel,
    anchor_distances,
    anchor_powers,
)

LINEAR_DISTANCE_CLAMP = 0.01


def _check_power(anchors: Sequence[Anchor]) -> np.ndarray:
    powers = anchor_powers(anchors)
    if (powers <= 0).any():
        raise InvalidParameterError("Analytic models need positive tx_power in milliwatts")
    return powers


def linear_path_gain(points: np.ndarray, anchors: Sequence[Anchor], alpha: float) -> np.ndarray:
    """(N, K) array of ``P_T / d**alpha``."""
    d = anchor_distances(points, anchors, LINEAR_DISTANCE_CLAMP)
    return _check_power(anchors)[None, :] / d ** alpha


def mean_rss_linear(u: Point, anchor: Anchor, params: AnalyticChannelParams) -> float:
    """Deterministic received power in milliwatts."""
    return float(linear_path_gain(points_to_array([u]), [anchor], params.alpha)[0, 0] + params.noise_floor)


def sample_rss_noisy(
    u: Point, anchor: Anchor, params: AnalyticChannelParams, rng: np.random.Generator
) -> float:
    """Mean power plus a zero-mean Gaussian draw of variance ``quant_noise_var``."""
    if params.model != ChannelKind.NOISY:
        raise InvalidParameterError("sample_rss_noisy needs a noisy channel")
    return mean_rss_linear(u, anchor, params) + float(rng.normal(0.0, np.sqrt(params.quant_noise_var)))


def sample_rss_fading(
    u: Point, anchor: Anchor, params: AnalyticChannelParams, rng: np.random.Generator
) -> float:
    """Path gain scaled by a unit-mean exponential power, plus the noise floor."""
    if params.model != ChannelKind.FADING:
        raise InvalidParameterError("sample_rss_fading needs a fading channel")
    gain = float(linear_path_gain(points_to_array([u]), [anchor], params.alpha)[0, 0])
    return float(rng.exponential(1.0)) * gain + params.noise_floor


class NoisyLinearModel(RssModel):
    name = "noisy"
    unit = "mW"

    def __init__(self, params: AnalyticChannelParams):
        if params.model != ChannelKind.NOISY:
            raise InvalidParameterError("NoisyLinearModel needs params.model == noisy")
        self.params = params

    def mean(self, points, anchors):
        return linear_path_gain(points, anchors, self.params.alpha) + self.params.noise_floor

    def sample(self, points, anchors, m, rng):
        mu = self.mean(points, anchors)
        noise = rng.normal(0.0, np.sqrt(self.params.quant_noise_var), size=(mu.shape[0], m, mu.shape[1]))
        return mu[:, None, :] + noise

    def describe(self) -> dict:
        return {
            "model": self.name,
            "alpha": self.params.alpha,
            "noise_floor": self.params.noise_floor,
            "quant_noise_var": self.params.quant_noise_var,
        }


class FadingLinearModel(RssModel):
    name = "fading"
    unit = "mW"

    def __init__(self, params: AnalyticChannelParams):
        if params.model != ChannelKind.FADING:
            raise InvalidParameterError("FadingLinearModel needs params.model == fading")
        self.params = params

    def mean(self, points, anchors):
        return linear_path_gain(points, anchors, self.params.alpha) + self.params.noise_floor

    def sample(self, points, anchors, m, rng):
        gain = linear_path_gain(points, anchors, self.params.alpha)
        h = rng.exponential(1.0, size=(gain.shape[0], m, gain.shape[1]))
        return h * gain[:, None, :] + self.params.noise_floor

    def describe(self) -> dict:
        return {"model": self.name, "alpha": self.params.alpha, "noise_floor": self.params.noise_floor}

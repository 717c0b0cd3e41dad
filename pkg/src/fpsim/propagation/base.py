"""Propagation value types and the abstract RSS model."""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from fpsim.errors import InvalidParameterError
from fpsim.geometry.base import Point, points_to_array


@dataclass(frozen=True)
class Anchor:
    """An access point: location plus transmit power (mW or dBm, by model)."""
    location: Point
    tx_power: float
    id: str = ""

    def __post_init__(self) -> None:
        if not math.isfinite(self.tx_power):
            raise InvalidParameterError(f"Anchor tx_power must be finite, got {self.tx_power}")


def anchor_coords(anchors: Sequence[Anchor]) -> np.ndarray:
    return points_to_array([a.location for a in anchors])


def anchor_powers(anchors: Sequence[Anchor]) -> np.ndarray:
    return np.array([a.tx_power for a in anchors], dtype=float)


def anchor_distances(points: np.ndarray, anchors: Sequence[Anchor], clamp: float) -> np.ndarray:
    """(N, K) distances from each point to each anchor, clamped from below."""
    pts = points_to_array(points)
    diff = pts[:, None, :] - anchor_coords(anchors)[None, :, :]
    return np.maximum(np.hypot(diff[..., 0], diff[..., 1]), clamp)


class ChannelKind(str, Enum):
    NOISY = "noisy"
    FADING = "fading"


@dataclass(frozen=True)
class AnalyticChannelParams:
    """Linear-power channel: ``P_T / d**alpha + N`` plus noise or fading."""
    alpha: float = 2.0
    noise_floor: float = 0.0
    quant_noise_var: float = 1e-6
    model: ChannelKind = ChannelKind.NOISY

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise InvalidParameterError(f"alpha must be positive, got {self.alpha}")
        if not self.noise_floor >= 0:
            raise InvalidParameterError(f"noise_floor must be >= 0, got {self.noise_floor}")
        if self.model == ChannelKind.NOISY and not self.quant_noise_var > 0:
            raise InvalidParameterError(
                f"quant_noise_var must be positive for the noisy model, got {self.quant_noise_var}"
            )


@dataclass(frozen=True)
class Cost231Params:
    """Multi-wall model: ``tx - (lc + 10*gamma*log10(d) + walls)`` with dB noise."""
    lc: float = 53.73
    gamma: float = 1.64
    l_w: float = 4.51
    sigma: float = 2.0

    def __post_init__(self) -> None:
        for name in ("lc", "gamma", "l_w", "sigma"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameterError(f"{name} must be finite")
        if self.sigma < 0:
            raise InvalidParameterError(f"sigma must be >= 0, got {self.sigma}")


@dataclass(frozen=True)
class Wall:
    """Wall segment with an optional attenuation override in dB."""
    start: Point
    end: Point
    attenuation: Optional[float] = None

    def __post_init__(self) -> None:
        if self.start.distance_to(self.end) <= 0:
            raise InvalidParameterError(f"Wall {self.start}-{self.end} has zero length")


@dataclass(frozen=True)
class FloorPlan:
    """Collection of wall segments."""
    walls: tuple[Wall, ...] = field(default_factory=tuple)

    def segments(self) -> np.ndarray:
        """(W, 2, 2) array of wall endpoints."""
        if not self.walls:
            return np.empty((0, 2, 2))
        return np.array([[w.start.as_tuple(), w.end.as_tuple()] for w in self.walls], dtype=float)

    def attenuations(self, default: float) -> np.ndarray:
        return np.array(
            [default if w.attenuation is None else w.attenuation for w in self.walls], dtype=float
        )

    def __len__(self) -> int:
        return len(self.walls)


class RssModel(ABC):
    """Generate noiseless and noisy RSS for arrays of locations."""

    name: str = ""
    unit: str = ""

    @abstractmethod
    def mean(self, points: np.ndarray, anchors: Sequence[Anchor]) -> np.ndarray:
        """(N, K) noiseless RSS."""
        ...

    @abstractmethod
    def sample(
        self,
        points: np.ndarray,
        anchors: Sequence[Anchor],
        m: int,
        rng: np.random.Generator,
    ) -> np.ndarray:
        """(N, m, K) i.i.d. RSS samples."""
        ...

    @property
    def is_noiseless(self) -> bool:
        return False

    def fingerprint_fn(self, anchors: Sequence[Anchor]) -> Callable[[np.ndarray], np.ndarray]:
        """Location array -> noiseless fingerprint array, for label maps."""
        anchors = tuple(anchors)
        return lambda pts: self.mean(pts, anchors)

    def describe(self) -> dict:
        return {"model": self.name}

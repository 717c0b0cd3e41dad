"""Core geometric value types: points, regions and training grids."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

import numpy as np
from shapely.geometry import Polygon, box

from fpsim.errors import InvalidParameterError


@dataclass(frozen=True, order=True)
class Point:
    """A 2-D location in meters."""
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InvalidParameterError(f"Point coordinates must be finite, got ({self.x}, {self.y})")

    def distance_to(self, other: Point) -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def shifted(self, dx: float, dy: float) -> Point:
        return Point(self.x + dx, self.y + dy)

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


def points_to_array(points: Iterable[Point] | np.ndarray) -> np.ndarray:
    """Stack points into an (N, 2) float array. Arrays pass through."""
    if isinstance(points, np.ndarray):
        arr = np.asarray(points, dtype=float)
        return arr.reshape(-1, 2)
    coords = [(p.x, p.y) for p in points]
    if not coords:
        return np.empty((0, 2), dtype=float)
    return np.asarray(coords, dtype=float)


def array_to_points(coords: np.ndarray) -> tuple[Point, ...]:
    return tuple(Point(float(x), float(y)) for x, y in np.asarray(coords, dtype=float).reshape(-1, 2))


@dataclass(frozen=True)
class Region:
    """Axis-aligned rectangular localization space."""
    origin: Point
    width: float
    height: float

    def __post_init__(self) -> None:
        if not (self.width > 0 and self.height > 0):
            raise InvalidParameterError(
                f"Region width and height must be positive, got {self.width} x {self.height}"
            )

    @classmethod
    def from_size(cls, width: float, height: float) -> Region:
        return cls(Point(0.0, 0.0), float(width), float(height))

    @property
    def x_max(self) -> float:
        return self.origin.x + self.width

    @property
    def y_max(self) -> float:
        return self.origin.y + self.height

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> Point:
        return Point(self.origin.x + self.width / 2, self.origin.y + self.height / 2)

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    def corners(self) -> tuple[Point, ...]:
        x0, y0 = self.origin.x, self.origin.y
        return (
            Point(x0, y0),
            Point(self.x_max, y0),
            Point(self.x_max, self.y_max),
            Point(x0, self.y_max),
        )

    def contains(self, point: Point, tol: float = 1e-9) -> bool:
        return (
            self.origin.x - tol <= point.x <= self.x_max + tol
            and self.origin.y - tol <= point.y <= self.y_max + tol
        )

    def contains_array(self, coords: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        coords = points_to_array(coords)
        return (
            (coords[:, 0] >= self.origin.x - tol)
            & (coords[:, 0] <= self.x_max + tol)
            & (coords[:, 1] >= self.origin.y - tol)
            & (coords[:, 1] <= self.y_max + tol)
        )

    def as_polygon(self) -> Polygon:
        return box(self.origin.x, self.origin.y, self.x_max, self.y_max)

    def sample_uniform(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw n uniform points as an (n, 2) array."""
        xs = rng.uniform(self.origin.x, self.x_max, size=n)
        ys = rng.uniform(self.origin.y, self.y_max, size=n)
        return np.column_stack([xs, ys])


class GridKind(str, Enum):
    SQUARE = "square"
    HEXAGONAL = "hexagonal"
    RANDOM = "random"
    SURVEYED = "surveyed"

    @classmethod
    def parse(cls, value: str | GridKind) -> GridKind:
        if isinstance(value, cls):
            return value
        aliases = {"hex": cls.HEXAGONAL, "sq": cls.SQUARE}
        key = str(value).strip().lower()
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise InvalidParameterError(f"Unknown grid kind '{value}'. Valid: hex, {valid}") from None


@dataclass(frozen=True)
class TrainingGrid:
    """Ordered set of surveyed training locations."""
    points: tuple[Point, ...]
    kind: GridKind
    spacing: float = 0.0
    _coords: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.points:
            raise InvalidParameterError("A training grid needs at least one point")
        coords = points_to_array(self.points)
        if len(np.unique(coords, axis=0)) != len(coords):
            raise InvalidParameterError("Training grid points must be pairwise distinct")
        coords.setflags(write=False)
        object.__setattr__(self, "_coords", coords)

    @classmethod
    def from_array(cls, coords: np.ndarray, kind: GridKind, spacing: float = 0.0) -> TrainingGrid:
        return cls(array_to_points(coords), kind, spacing)

    @property
    def coords(self) -> np.ndarray:
        """Read-only (N, 2) coordinate array."""
        return self._coords

    def __len__(self) -> int:
        return len(self.points)

    def min_pairwise_distance(self) -> float:
        if len(self.points) < 2:
            return math.inf
        from scipy.spatial.distance import pdist

        return float(pdist(self.coords).min())


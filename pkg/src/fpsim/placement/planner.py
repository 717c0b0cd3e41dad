"""Anchor addition: greedy Voronoi-vertex placement and random baselines."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist

from fpsim.errors import InvalidParameterError
from fpsim.geometry.base import Point, Region, points_to_array
from fpsim.geometry.voronoi import voronoi_diagram
from fpsim.propagation.base import Anchor

logger = logging.getLogger(__name__)


class PlacementMethod(str, Enum):
    VORONOI_VERTICES = "voronoi_vertices"
    RANDOM = "random"

    @classmethod
    def parse(cls, value: str | PlacementMethod) -> PlacementMethod:
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        if key in ("voronoi", "voronoi_vertices", "vertices"):
            return cls.VORONOI_VERTICES
        if key == "random":
            return cls.RANDOM
        raise InvalidParameterError(f"Unknown placement method '{value}'. Valid: voronoi, random")


@dataclass(frozen=True)
class Candidate:
    point: Point
    min_distance: float


@dataclass(frozen=True)
class PlacementPlan:
    """Existing anchors plus the ordered points chosen for new ones."""
    existing: tuple[Anchor, ...]
    added: tuple[Point, ...]
    method: PlacementMethod
    min_distances: tuple[float, ...] = field(default=())

    def anchors(self, tx_power: float | None = None) -> list[Anchor]:
        """Existing anchors followed by new ones at ``tx_power`` (default: first anchor's)."""
        power = self.existing[0].tx_power if tx_power is None else tx_power
        start = len(self.existing)
        new = [Anchor(p, power, f"AP{start + i + 1}") for i, p in enumerate(self.added)]
        return list(self.existing) + new


def _min_distances(points: np.ndarray, anchors: np.ndarray) -> np.ndarray:
    return cdist(points, anchors).min(axis=1)


def voronoi_vertex_candidates(anchors: Sequence[Point], region: Region) -> list[Candidate]:
    """Vertices of the anchors' clipped Voronoi diagram, farthest first.

    Ties in distance are broken by lexicographic ``(x, y)``.
    """
    if not anchors:
        raise InvalidParameterError("Candidate search needs at least one anchor")
    diagram = voronoi_diagram(list(anchors), region)
    vertices = points_to_array(diagram.vertices)
    dist = _min_distances(vertices, points_to_array(anchors))
    candidates = [Candidate(Point(float(x), float(y)), float(d)) for (x, y), d in zip(vertices, dist)]
    candidates.sort(key=lambda c: (-round(c.min_distance, 9), c.point.x, c.point.y))
    return candidates


def place_new_anchors(
    anchors: Sequence[Anchor],
    region: Region,
    count: int,
    method: PlacementMethod | str = PlacementMethod.VORONOI_VERTICES,
    seed: int = 0,
) -> PlacementPlan:
    """Choose ``count`` new anchor locations.

    Voronoi placement repeatedly takes the top vertex candidate and
    recomputes the diagram with it included. Random placement draws
    uniform points from a generator seeded with ``seed``.
    """
    if count < 1:
        raise InvalidParameterError(f"count must be >= 1, got {count}")
    if not anchors:
        raise InvalidParameterError("Placement needs at least one existing anchor")
    method = PlacementMethod.parse(method)
    current = [a.location for a in anchors]
    added: list[Point] = []
    distances: list[float] = []

    if method == PlacementMethod.VORONOI_VERTICES:
        for step in range(count):
            top = voronoi_vertex_candidates(current, region)[0]
            if top.min_distance <= 0:
                raise InvalidParameterError(f"No free Voronoi vertex left at step {step + 1}")
            current.append(top.point)
            added.append(top.point)
            distances.append(top.min_distance)
            logger.info("Placed anchor %d at (%.3f, %.3f), min distance %.3f m",
                        step + 1, top.point.x, top.point.y, top.min_distance)
    else:
        rng = np.random.default_rng(seed)
        for point in region.sample_uniform(rng, count):
            distances.append(float(_min_distances(point[None, :], points_to_array(current))[0]))
            p = Point(float(point[0]), float(point[1]))
            current.append(p)
            added.append(p)

    return PlacementPlan(
        existing=tuple(anchors),
        added=tuple(added),
        method=method,
        min_distances=tuple(distances),
    )

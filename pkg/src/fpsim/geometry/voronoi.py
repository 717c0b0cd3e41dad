"""Region-clipped Voronoi diagrams and covering radii."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from shapely.geometry import Polygon
from shapely.geometry.polygon import orient

from fpsim.errors import InvalidParameterError
from .base import Point, Region, array_to_points, points_to_array

PolygonLike = Sequence[Point] | np.ndarray | Polygon


@dataclass(frozen=True)
class VoronoiDiagram:
    """Voronoi cells of ``sites`` clipped to ``region``."""
    sites: tuple[Point, ...]
    cells: tuple[tuple[Point, ...], ...]
    vertices: tuple[Point, ...]
    region: Region

    def cell_polygon(self, index: int) -> Polygon:
        return Polygon([p.as_tuple() for p in self.cells[index]])

    def nearest_site(self, coords: np.ndarray) -> np.ndarray:
        """Index of the nearest site for each row of ``coords`` (lowest index on ties)."""
        from scipy.spatial.distance import cdist

        return np.argmin(cdist(points_to_array(coords), points_to_array(self.sites)), axis=1)


def _half_plane(site: np.ndarray, other: np.ndarray, reach: float) -> Polygon:
    """Large polygon covering the points at least as close to ``site`` as to ``other``."""
    mid = (site + other) / 2
    normal = other - site
    normal = normal / np.linalg.norm(normal)
    tangent = np.array([-normal[1], normal[0]])
    return Polygon([
        mid + tangent * reach,
        mid + tangent * reach - normal * reach,
        mid - tangent * reach - normal * reach,
        mid - tangent * reach,
    ])


def _unique_points(coords: list[tuple[float, float]], decimals: int = 9) -> tuple[Point, ...]:
    seen: dict[tuple[float, float], tuple[float, float]] = {}
    for x, y in coords:
        key = (round(x, decimals) + 0.0, round(y, decimals) + 0.0)
        seen.setdefault(key, (x, y))
    return tuple(Point(x, y) for x, y in sorted(seen.values()))


def voronoi_diagram(sites: Sequence[Point] | np.ndarray, region: Region) -> VoronoiDiagram:
    """Clip each site's cell to the region by intersecting bisector half-planes."""
    coords = points_to_array(sites)
    if len(coords) == 0:
        raise InvalidParameterError("Voronoi diagram needs at least one site")
    if len(np.unique(coords, axis=0)) != len(coords):
        raise InvalidParameterError("Voronoi sites must be distinct")
    if not region.contains_array(coords).all():
        raise InvalidParameterError("Voronoi sites must lie inside the region")

    bounds = region.as_polygon()
    reach = 4.0 * region.diagonal + 1.0
    cells: list[tuple[Point, ...]] = []
    corners: list[tuple[float, float]] = []
    for i, site in enumerate(coords):
        cell = bounds
        for j, other in enumerate(coords):
            if i == j:
                continue
            cell = cell.intersection(_half_plane(site, other, reach))
        cell = orient(Polygon(cell.exterior.coords).simplify(0), sign=1.0)
        ring = [(float(x), float(y)) for x, y in cell.exterior.coords[:-1]]
        cells.append(tuple(Point(x, y) for x, y in ring))
        corners.extend(ring)

    return VoronoiDiagram(
        sites=array_to_points(coords),
        cells=tuple(cells),
        vertices=_unique_points(corners),
        region=region,
    )


def covering_radius(cell_polygon: PolygonLike, center: Point) -> float:
    """Largest distance from ``center`` to a vertex of the (convex) cell."""
    if isinstance(cell_polygon, Polygon):
        if cell_polygon.is_empty:
            raise InvalidParameterError("Cannot compute covering radius of an empty polygon")
        coords = np.asarray(cell_polygon.exterior.coords)[:-1]
    else:
        coords = points_to_array(cell_polygon)
    if len(coords) == 0:
        raise InvalidParameterError("Cannot compute covering radius of an empty polygon")
    return float(np.hypot(coords[:, 0] - center.x, coords[:, 1] - center.y).max())

"""Wall-crossing counts for direct paths, via a shapely STRtree over the walls."""

from typing import Sequence

import numpy as np
import shapely

from fpsim.geometry.base import Point, points_to_array
from .base import Anchor, FloorPlan, anchor_coords


def _path_geometries(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Line strings p->q; a zero-length path becomes a point."""
    lines = shapely.linestrings(np.stack([p, q], axis=1))
    same = np.all(p == q, axis=1)
    if same.any():
        lines[same] = shapely.points(p[same])
    return lines


def crossed_walls(p: np.ndarray, q: np.ndarray, plan: FloorPlan) -> np.ndarray:
    """(2, M) index pairs ``(path, wall)`` for every path p[i]->q[i] touching a wall.

    Touching a wall endpoint or running along a wall counts as a crossing.
    """
    p = points_to_array(p)
    q = points_to_array(q)
    if not plan.walls or len(p) == 0:
        return np.empty((2, 0), dtype=np.intp)
    tree = shapely.STRtree(shapely.linestrings(plan.segments()))
    return tree.query(_path_geometries(p, q), predicate="intersects")


def count_wall_intersections(u: Point, w: Point, plan: FloorPlan) -> int:
    """Number of walls crossed by the segment u-w."""
    pairs = crossed_walls(np.array([u.as_tuple()]), np.array([w.as_tuple()]), plan)
    return int(pairs.shape[1])


def wall_loss_matrix(
    points: np.ndarray,
    anchors: Sequence[Anchor],
    plan: FloorPlan,
    default_attenuation: float,
) -> np.ndarray:
    """(N, K) summed attenuation in dB along each point-anchor path."""
    pts = points_to_array(points)
    n, k = len(pts), len(anchors)
    loss = np.zeros(n * k)
    if plan.walls and n:
        starts = np.repeat(pts, k, axis=0)
        ends = np.tile(anchor_coords(anchors), (n, 1))
        path, wall = crossed_walls(starts, ends, plan)
        np.add.at(loss, path, plan.attenuations(default_attenuation)[wall])
    return loss.reshape(n, k)

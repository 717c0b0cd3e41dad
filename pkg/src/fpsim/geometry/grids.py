"""Training grid generators: square and hexagonal lattices, random layouts."""

from __future__ import annotations

import logging
import math

import numpy as np

from fpsim.errors import InvalidParameterError
from .base import GridKind, Region, TrainingGrid

logger = logging.getLogger(__name__)

_EPS = 1e-9


def _axis_positions(start: float, side: float, step: float) -> np.ndarray:
    """Positions ``start + step/2 + i*step`` that fit in [start, start+side].

    A step too large for even the first position falls back to the axis center.
    """
    n = int(math.floor(side / step + 0.5 + _EPS))
    if n == 0:
        return np.array([start + side / 2])
    return np.minimum(start + step / 2 + step * np.arange(n), start + side)


def generate_square_grid(region: Region, cell: float) -> TrainingGrid:
    """Axis-aligned lattice with spacing ``cell``.

    The first row and column sit ``cell/2`` from the origin edges. A cell
    more than twice a side collapses that axis to its center.
    """
    if not cell > 0:
        raise InvalidParameterError(f"Grid cell size must be positive, got {cell}")
    xs = _axis_positions(region.origin.x, region.width, cell)
    ys = _axis_positions(region.origin.y, region.height, cell)
    gx, gy = np.meshgrid(xs, ys)
    coords = np.column_stack([gx.ravel(), gy.ravel()])
    return TrainingGrid.from_array(coords, GridKind.SQUARE, float(cell))


def generate_hex_grid(region: Region, min_distance: float) -> TrainingGrid:
    """Hexagonal lattice: rows ``d*sqrt(3)/2`` apart, odd rows shifted by ``d/2``."""
    d = min_distance
    if not d > 0:
        raise InvalidParameterError(f"Hexagonal min distance must be positive, got {d}")
    dy = d * math.sqrt(3) / 2
    ys = _axis_positions(region.origin.y, region.height, dy)
    shift = d / 2 if len(ys) > 1 else 0.0
    xs = _axis_positions(region.origin.x, region.width, d)

    rows = []
    for j, y in enumerate(ys):
        offset = shift if j % 2 == 1 else 0.0
        rows.append(np.column_stack([xs + offset, np.full(len(xs), y)]))
    coords = np.vstack(rows)
    coords = coords[region.contains_array(coords)]
    if len(coords) == 0:
        coords = np.array([[region.center.x, region.center.y]])
    return TrainingGrid.from_array(coords, GridKind.HEXAGONAL, float(d))


def generate_random_grid(region: Region, n: int, seed: int) -> TrainingGrid:
    """``n`` i.i.d. uniform points over the region, reproducible for a fixed seed."""
    if n < 1:
        raise InvalidParameterError(f"Random grid needs n >= 1, got {n}")
    rng = np.random.default_rng(seed)
    coords = region.sample_uniform(rng, n)
    return TrainingGrid.from_array(coords, GridKind.RANDOM, 0.0)


def grid_for_count(kind: GridKind, region: Region, count: int, seed: int = 0) -> TrainingGrid:
    """Grid of the given kind whose size is as close as possible to ``count``.

    Lattice spacings are scanned on a fine geometric sweep; among spacings
    giving the closest point count the largest wins.
    """
    if count < 1:
        raise InvalidParameterError(f"Grid point count must be >= 1, got {count}")
    if kind == GridKind.RANDOM:
        return generate_random_grid(region, count, seed)

    make = generate_square_grid if kind == GridKind.SQUARE else generate_hex_grid
    nominal = math.sqrt(region.area / count)
    best: TrainingGrid | None = None
    best_gap = math.inf
    for spacing in np.geomspace(nominal * 2.0, nominal * 0.4, 1200):
        grid = make(region, float(spacing))
        gap = abs(len(grid) - count)
        if gap < best_gap:
            best, best_gap = grid, gap
            if gap == 0:
                break
    assert best is not None
    if best_gap:
        logger.info(
            "No %s lattice has exactly %d points in this region; using %d (spacing %.4f m)",
            kind.value, count, len(best), best.spacing,
        )
    return best

"""Modified Voronoi label maps over a raster of the region."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.spatial.distance import cdist

from fpsim.errors import ConsistencyError, InvalidParameterError
from .base import Region, TrainingGrid

FingerprintFn = Callable[[np.ndarray], np.ndarray]
Metric = Callable[[np.ndarray, np.ndarray], np.ndarray]

DEFAULT_RESOLUTION = 0.1
_CHUNK = 4096


def euclidean(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return cdist(a, b)


def raster_axes(region: Region, resolution: float) -> tuple[np.ndarray, np.ndarray]:
    """Cell-center coordinates along x and y."""
    if not resolution > 0:
        raise InvalidParameterError(f"Raster resolution must be positive, got {resolution}")
    nx = max(1, math.ceil(region.width / resolution - 1e-9))
    ny = max(1, math.ceil(region.height / resolution - 1e-9))
    xs = np.minimum(region.origin.x + (np.arange(nx) + 0.5) * resolution, region.x_max)
    ys = np.minimum(region.origin.y + (np.arange(ny) + 0.5) * resolution, region.y_max)
    return xs, ys


def raster_centers(region: Region, resolution: float) -> np.ndarray:
    """Row-major (ny*nx, 2) array of raster cell centers."""
    xs, ys = raster_axes(region, resolution)
    gx, gy = np.meshgrid(xs, ys)
    return np.column_stack([gx.ravel(), gy.ravel()])


@dataclass(frozen=True)
class LabelMap:
    """Raster of training-point indices; ``labels[iy, ix]``."""
    resolution: float
    labels: np.ndarray
    region: Region

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape  # type: ignore[return-value]

    def centers(self) -> np.ndarray:
        return raster_centers(self.region, self.resolution)


def assign_labels(
    grid: TrainingGrid,
    points: np.ndarray,
    fingerprint_fn: FingerprintFn,
    metric: Metric = euclidean,
) -> np.ndarray:
    """Index of the training point whose fingerprint is nearest to each point's."""
    reference = np.asarray(fingerprint_fn(grid.coords), dtype=float)
    out = np.empty(len(points), dtype=np.int64)
    for start in range(0, len(points), _CHUNK):
        block = np.asarray(fingerprint_fn(points[start:start + _CHUNK]), dtype=float)
        out[start:start + _CHUNK] = np.argmin(metric(block, reference), axis=1)
    return out


def modified_voronoi(
    grid: TrainingGrid,
    fingerprint_fn: FingerprintFn,
    metric: Metric = euclidean,
    resolution: float = DEFAULT_RESOLUTION,
    region: Region | None = None,
) -> LabelMap:
    """Label each raster center with the training point of nearest fingerprint.

    ``fingerprint_fn`` maps an (N, 2) array of locations to an (N, K) array of
    noiseless fingerprints. ``metric`` returns the pairwise distance matrix
    between two fingerprint arrays. Ties go to the lowest training index.
    """
    if region is None:
        coords = grid.coords
        region = Region.from_size(float(coords[:, 0].max()) + 1.0, float(coords[:, 1].max()) + 1.0)
    xs, ys = raster_axes(region, resolution)
    labels = assign_labels(grid, raster_centers(region, resolution), fingerprint_fn, metric)
    return LabelMap(resolution=resolution, labels=labels.reshape(len(ys), len(xs)), region=region)


def _check_labels(grid: TrainingGrid, labelmap: LabelMap) -> np.ndarray:
    labels = labelmap.labels.ravel()
    if labels.size and (labels.min() < 0 or labels.max() >= len(grid)):
        raise ConsistencyError(
            f"Label map references training index outside [0, {len(grid)})"
        )
    return labels


def covering_distances(grid: TrainingGrid, labelmap: LabelMap) -> np.ndarray:
    """Distance from every raster center to the training point it is labeled with."""
    labels = _check_labels(grid, labelmap)
    diff = labelmap.centers() - grid.coords[labels]
    return np.hypot(diff[:, 0], diff[:, 1])


def cell_covering_radii(grid: TrainingGrid, labelmap: LabelMap) -> np.ndarray:
    """Per training point, the largest distance to a raster cell carrying its label.

    Training points that label no raster cell get 0.
    """
    labels = _check_labels(grid, labelmap)
    radii = np.zeros(len(grid))
    np.maximum.at(radii, labels, covering_distances(grid, labelmap))
    return radii


def max_covering_radius(grid: TrainingGrid, labelmap: LabelMap) -> float:
    """Worst-case localization error bound over the labeled raster."""
    return float(covering_distances(grid, labelmap).max())

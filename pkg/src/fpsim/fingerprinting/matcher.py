"""Euclidean fingerprint matching and kNN location estimates."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist

from fpsim.errors import InvalidInputError, InvalidParameterError
from fpsim.geometry.base import Point, points_to_array
from fpsim.propagation.base import Anchor, RssModel
from .database import Fingerprint, TrainingDatabase, sample_means

WEIGHT_GUARD = 1e-6
DEFAULT_K = 3


@dataclass(frozen=True)
class LocalizationResult:
    estimate: Point
    true_location: Point
    error: float
    k_used: int


def fingerprint_distance(a: Fingerprint, b: Fingerprint) -> float:
    """Euclidean norm of the difference of mean vectors."""
    if len(a) != len(b):
        raise InvalidInputError(f"Fingerprints cover {len(a)} and {len(b)} anchors")
    return float(np.linalg.norm(a.per_anchor_mean - b.per_anchor_mean))


def knn_positions(
    db: TrainingDatabase,
    queries: np.ndarray,
    k: int,
    weighted: bool = False,
) -> np.ndarray:
    """(Q, 2) estimates for a (Q, K) array of query fingerprint means.

    Neighbors are ordered by distance with ties going to the lower
    training index.
    """
    if not 1 <= k <= len(db):
        raise InvalidParameterError(f"k must be in [1, {len(db)}], got {k}")
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    if queries.shape[1] != db.n_anchors:
        raise InvalidInputError(f"Queries cover {queries.shape[1]} anchors, database {db.n_anchors}")
    dist = cdist(queries, db.means)
    nearest = np.argsort(dist, axis=1, kind="stable")[:, :k]
    positions = db.grid.coords[nearest]
    if not weighted:
        return positions.mean(axis=1)
    weights = 1.0 / (np.take_along_axis(dist, nearest, axis=1) + WEIGHT_GUARD)
    return (positions * weights[..., None]).sum(axis=1) / weights.sum(axis=1, keepdims=True)


def knn_estimate(db: TrainingDatabase, query: Fingerprint, k: int = DEFAULT_K, weighted: bool = False) -> Point:
    """Centroid (optionally inverse-distance weighted) of the k best matches."""
    if len(query) != db.n_anchors:
        raise InvalidInputError(f"Query covers {len(query)} anchors, database {db.n_anchors}")
    x, y = knn_positions(db, query.per_anchor_mean[None, :], k, weighted)[0]
    return Point(float(x), float(y))


def localize_many(
    db: TrainingDatabase,
    anchors: Sequence[Anchor],
    model: RssModel,
    targets: np.ndarray,
    m_runtime: int,
    k: int,
    weighted: bool,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Measure at each target, match, and return ``(estimates, errors)``."""
    if m_runtime < 1:
        raise InvalidParameterError(f"m_runtime must be >= 1, got {m_runtime}")
    targets = points_to_array(targets)
    samples = model.sample(targets, tuple(anchors), m_runtime, rng)
    estimates = knn_positions(db, sample_means(samples), k, weighted)
    errors = np.hypot(*(estimates - targets).T)
    return estimates, errors


def localize(
    db: TrainingDatabase,
    anchors: Sequence[Anchor],
    model: RssModel,
    target: Point,
    m_runtime: int,
    k: int,
    weighted: bool,
    rng: np.random.Generator,
) -> LocalizationResult:
    """Localize a single target from ``m_runtime`` fresh measurements."""
    estimates, errors = localize_many(
        db, anchors, model, points_to_array([target]), m_runtime, k, weighted, rng
    )
    return LocalizationResult(
        estimate=Point(float(estimates[0, 0]), float(estimates[0, 1])),
        true_location=target,
        error=float(errors[0]),
        k_used=k,
    )

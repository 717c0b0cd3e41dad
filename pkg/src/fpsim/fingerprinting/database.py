"""Fingerprints and the training database."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from fpsim.analysis.divergence import DiscreteDistribution
from fpsim.errors import InvalidInputError, InvalidParameterError, TraceParseError
from fpsim.geometry.base import GridKind, TrainingGrid
from fpsim.output.csvio import read_rows
from fpsim.output.formatter import format_csv
from fpsim.propagation.base import Anchor, RssModel
from fpsim.rng import StreamKey, derive_rng, parallel_map

logger = logging.getLogger(__name__)

MISSING_RSS_DBM = -100.0
DATABASE_HEADER = ("point_index", "x", "y", "ap_id", "mean_rss", "count")


@dataclass(frozen=True)
class Fingerprint:
    """Per-anchor RSS summary of one location."""
    per_anchor_mean: np.ndarray
    per_anchor_count: tuple[int, ...]
    per_anchor_empirical: Optional[tuple[DiscreteDistribution, ...]] = None

    def __post_init__(self) -> None:
        mean = np.array(self.per_anchor_mean, dtype=float).ravel()
        mean.setflags(write=False)
        object.__setattr__(self, "per_anchor_mean", mean)
        object.__setattr__(self, "per_anchor_count", tuple(int(c) for c in self.per_anchor_count))
        if len(self.per_anchor_count) != len(mean):
            raise InvalidInputError("Fingerprint mean and count vectors differ in length")

    def __len__(self) -> int:
        return len(self.per_anchor_mean)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Fingerprint):
            return NotImplemented
        return (
            self.per_anchor_count == other.per_anchor_count
            and bool(np.array_equal(self.per_anchor_mean, other.per_anchor_mean))
            and self.per_anchor_empirical == other.per_anchor_empirical
        )

    @property
    def all_missing(self) -> bool:
        return all(c == 0 for c in self.per_anchor_count)


def make_fingerprint(
    samples: Sequence[Sequence[float]] | np.ndarray,
    floor: float = MISSING_RSS_DBM,
) -> Fingerprint:
    """Average each anchor's samples; anchors without samples get ``floor``."""
    columns = [np.asarray(s, dtype=float).ravel() for s in samples]
    if not columns:
        raise InvalidInputError("A fingerprint needs at least one anchor")
    counts = [len(c) for c in columns]
    if all(c == 0 for c in counts):
        raise InvalidInputError("Every anchor is missing; cannot build a fingerprint")
    means = [float(c.mean()) if len(c) else floor for c in columns]
    return Fingerprint(np.array(means), tuple(counts))


def sample_means(samples: np.ndarray) -> np.ndarray:
    """(N, K) means of an (N, m, K) sample block.

    Each mean is reduced over a contiguous run, so it matches
    :func:`make_fingerprint` on the same values bit for bit.
    """
    samples = np.asarray(samples, dtype=float)
    return np.ascontiguousarray(np.swapaxes(samples, 1, 2)).mean(axis=2)


def floor_fingerprint(n_anchors: int, floor: float = MISSING_RSS_DBM) -> Fingerprint:
    """Fingerprint of a location where no anchor was heard."""
    return Fingerprint(np.full(n_anchors, floor), (0,) * n_anchors)


@dataclass(frozen=True)
class TrainingDatabase:
    """Training grid with one fingerprint per point."""
    grid: TrainingGrid
    fingerprints: tuple[Fingerprint, ...]
    anchor_ids: tuple[str, ...] = ()
    meta: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "fingerprints", tuple(self.fingerprints))
        if len(self.fingerprints) != len(self.grid):
            raise InvalidInputError(
                f"{len(self.fingerprints)} fingerprints for {len(self.grid)} training points"
            )
        widths = {len(f) for f in self.fingerprints}
        if len(widths) != 1:
            raise InvalidInputError("All fingerprints must cover the same anchors")
        width = widths.pop()
        if not self.anchor_ids:
            object.__setattr__(self, "anchor_ids", tuple(f"AP{i + 1}" for i in range(width)))
        elif len(self.anchor_ids) != width:
            raise InvalidInputError(f"{len(self.anchor_ids)} anchor ids for {width}-anchor fingerprints")
        means = np.vstack([f.per_anchor_mean for f in self.fingerprints])
        means.setflags(write=False)
        object.__setattr__(self, "_means", means)

    @property
    def means(self) -> np.ndarray:
        """(N, K) matrix of fingerprint means."""
        return self._means  # type: ignore[attr-defined]

    @property
    def n_anchors(self) -> int:
        return len(self.anchor_ids)

    def __len__(self) -> int:
        return len(self.fingerprints)


def build_database(
    grid: TrainingGrid,
    anchors: Sequence[Anchor],
    model: RssModel,
    m: int,
    master_seed: int,
    stream: Sequence[StreamKey] = (),
    threads: int = 1,
) -> TrainingDatabase:
    """Survey every training point with ``m`` samples per anchor.

    Each point draws from its own stream ``(master_seed, *stream, "training", index)``.
    """
    if m < 1:
        raise InvalidParameterError(f"m must be >= 1, got {m}")
    anchors = tuple(anchors)
    coords = grid.coords

    def survey(index: int) -> Fingerprint:
        rng = derive_rng(master_seed, *stream, "training", index)
        samples = model.sample(coords[index:index + 1], anchors, m, rng)[0]
        return make_fingerprint(samples.T)

    fingerprints = parallel_map(survey, range(len(grid)), threads)
    meta = {**model.describe(), "m_training": m, "seed": master_seed}
    logger.info("Built database: %d points, %d anchors, m=%d", len(grid), len(anchors), m)
    return TrainingDatabase(
        grid=grid,
        fingerprints=tuple(fingerprints),
        anchor_ids=tuple(a.id or f"AP{i + 1}" for i, a in enumerate(anchors)),
        meta=meta,
    )


def database_to_csv(db: TrainingDatabase) -> str:
    rows = (
        (i, p.x, p.y, ap_id, float(fp.per_anchor_mean[j]), fp.per_anchor_count[j])
        for i, (p, fp) in enumerate(zip(db.grid.points, db.fingerprints))
        for j, ap_id in enumerate(db.anchor_ids)
    )
    return format_csv(DATABASE_HEADER, rows)


def export_database(db: TrainingDatabase, path: str | Path) -> None:
    Path(path).write_text(database_to_csv(db))


def import_database(path: str | Path, floor: float = MISSING_RSS_DBM) -> TrainingDatabase:
    """Read a database exported by :func:`export_database`.

    Anchors are ordered by first appearance; absent entries are floored.
    """
    points: dict[int, tuple[float, float]] = {}
    entries: dict[tuple[int, str], tuple[float, int]] = {}
    ap_order: list[str] = []
    for row in read_rows(path, DATABASE_HEADER):
        index = row.integer("point_index")
        xy = (row.number("x"), row.number("y"))
        if points.setdefault(index, xy) != xy:  # type: ignore[arg-type]
            raise TraceParseError(f"point {index} listed with two locations", line=row.line, path=str(path))
        ap_id = row.text("ap_id")
        if ap_id not in ap_order:
            ap_order.append(ap_id)
        key = (index, ap_id)
        if key in entries:
            raise TraceParseError(f"duplicate entry for point {index}, AP {ap_id}", line=row.line, path=str(path))
        entries[key] = (row.number("mean_rss"), row.integer("count"))  # type: ignore[assignment]
    if not points:
        raise TraceParseError("database file has no rows", path=str(path))

    order = sorted(points)
    fingerprints = []
    for index in order:
        means, counts = [], []
        for ap_id in ap_order:
            mean, count = entries.get((index, ap_id), (floor, 0))
            means.append(mean)
            counts.append(count)
        fingerprints.append(Fingerprint(np.array(means), tuple(counts)))
    grid = TrainingGrid.from_array(np.array([points[i] for i in order]), GridKind.SURVEYED)
    return TrainingDatabase(grid, tuple(fingerprints), tuple(ap_order), {"source": str(path)})

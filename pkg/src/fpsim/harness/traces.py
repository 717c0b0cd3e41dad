"""Measurement traces: parsing, database ingestion, evaluation and synthesis."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from fpsim.errors import DuplicateKeyError, InvalidParameterError, TraceParseError
from fpsim.fingerprinting.database import (
    Fingerprint,
    TrainingDatabase,
    floor_fingerprint,
    make_fingerprint,
)
from fpsim.fingerprinting.matcher import DEFAULT_K, knn_positions
from fpsim.fingerprinting.stats import ErrorStats, error_stats
from fpsim.geometry.base import GridKind, Point, TrainingGrid
from fpsim.geometry.grids import grid_for_count
from fpsim.output.csvio import read_rows
from fpsim.output.formatter import format_csv
from fpsim.rng import chunk_sizes, derive_rng
from .config import ExperimentConfig
from .runner import TRIAL_CHUNK, ExperimentRunner

logger = logging.getLogger(__name__)

TRACE_HEADER = ("loc_id", "x", "y", "ap_id", "rss_dbm", "sample_idx")
EVALUATION_HEADER = ("loc_id", "x", "y", "est_x", "est_y", "error", "flag")
ALL_MISSING_FLAG = "all_missing"


@dataclass(frozen=True)
class TraceRecord:
    """One trace row; ``rss`` is None when the AP was not heard."""
    loc_id: str
    x: float
    y: float
    ap_id: str
    rss: Optional[float]
    sample_idx: int


@dataclass
class Trace:
    """Records grouped by location, in first-appearance order."""
    locations: dict[str, Point]
    ap_ids: list[str]
    samples: dict[tuple[str, str], dict[int, float]]

    def fingerprint(self, loc_id: str, ap_ids: Sequence[str]) -> Fingerprint:
        """Mean fingerprint over ``ap_ids``; a location with no samples is floored."""
        columns = [
            [v for _, v in sorted(self.samples.get((loc_id, ap), {}).items())] for ap in ap_ids
        ]
        if not any(columns):
            return floor_fingerprint(len(ap_ids))
        return make_fingerprint(columns)


def parse_trace(path: str | Path) -> Trace:
    """Read and validate a trace file.

    Raises
    ------
    TraceParseError
        Malformed rows (with their line number), a location listed at two
        positions, or a file without records.
    DuplicateKeyError
        A repeated ``(loc_id, ap_id, sample_idx)``.
    """
    path = Path(path)
    locations: dict[str, Point] = {}
    ap_ids: list[str] = []
    samples: dict[tuple[str, str], dict[int, float]] = {}
    for row in read_rows(path, TRACE_HEADER):
        loc_id, ap_id = row.text("loc_id"), row.text("ap_id")
        if not loc_id or not ap_id:
            raise TraceParseError("loc_id and ap_id must be non-empty", line=row.line, path=str(path))
        point = Point(row.number("x"), row.number("y"))  # type: ignore[arg-type]
        if locations.setdefault(loc_id, point) != point:
            raise TraceParseError(f"location '{loc_id}' listed at two positions", line=row.line, path=str(path))
        if ap_id not in ap_ids:
            ap_ids.append(ap_id)
        cell = samples.setdefault((loc_id, ap_id), {})
        rss = row.number("rss_dbm", allow_empty=True)
        if rss is None:
            continue
        index = row.integer("sample_idx")
        if index < 0:
            raise TraceParseError(f"sample_idx must be >= 0, got {index}", line=row.line, path=str(path))
        if index in cell:
            raise DuplicateKeyError(
                f"duplicate sample ({loc_id}, {ap_id}, {index})", line=row.line, path=str(path)
            )
        cell[index] = rss
    if not locations:
        raise TraceParseError("trace has no records", path=str(path))
    return Trace(locations, ap_ids, samples)


def _database(trace: Trace, ap_ids: Sequence[str], source: str) -> TrainingDatabase:
    try:
        grid = TrainingGrid.from_array(
            np.array([p.as_tuple() for p in trace.locations.values()]), GridKind.SURVEYED
        )
    except InvalidParameterError as e:
        raise TraceParseError(str(e), path=source) from None
    fingerprints = []
    for loc_id in trace.locations:
        fp = trace.fingerprint(loc_id, ap_ids)
        if fp.all_missing:
            logger.warning("training location %s heard no AP; using the floor fingerprint", loc_id)
        fingerprints.append(fp)
    return TrainingDatabase(grid, tuple(fingerprints), tuple(ap_ids), {"source": source})


def ingest_trace(path: str | Path) -> tuple[TrainingGrid, TrainingDatabase]:
    """Build a surveyed grid and its database from a trace file."""
    trace = parse_trace(path)
    db = _database(trace, trace.ap_ids, str(path))
    logger.info("Ingested %s: %d locations, %d APs", path, len(db), db.n_anchors)
    return db.grid, db


@dataclass
class TraceEvaluation:
    rows: list[tuple]
    stats: ErrorStats

    @property
    def flagged(self) -> list[str]:
        return [r[0] for r in self.rows if r[-1]]


def evaluate_on_trace(
    train_path: str | Path,
    eval_path: str | Path,
    k: int = DEFAULT_K,
    weighted: bool = False,
) -> TraceEvaluation:
    """Localize every evaluation location against the training trace.

    Both files share the union of their AP ids; entries an AP is missing
    from are floored. Evaluation locations that heard no AP still get an
    estimate and are flagged ``all_missing``.
    """
    train, evaluation = parse_trace(train_path), parse_trace(eval_path)
    ap_ids = train.ap_ids + [a for a in evaluation.ap_ids if a not in train.ap_ids]
    db = _database(train, ap_ids, str(train_path))

    queries = [evaluation.fingerprint(loc_id, ap_ids) for loc_id in evaluation.locations]
    truth = np.array([p.as_tuple() for p in evaluation.locations.values()])
    estimates = knn_positions(db, np.vstack([q.per_anchor_mean for q in queries]), k, weighted)
    errors = np.hypot(*(estimates - truth).T)

    rows = [
        (loc_id, float(t[0]), float(t[1]), float(e[0]), float(e[1]), float(err),
         ALL_MISSING_FLAG if q.all_missing else "")
        for loc_id, t, e, err, q in zip(evaluation.locations, truth, estimates, errors, queries)
    ]
    result = TraceEvaluation(rows, error_stats(errors))
    if result.flagged:
        logger.warning("%d evaluation location(s) heard no AP", len(result.flagged))
    return result


def trace_to_csv(records: Iterable[TraceRecord]) -> str:
    return format_csv(
        TRACE_HEADER,
        ((r.loc_id, r.x, r.y, r.ap_id, "" if r.rss is None else r.rss, r.sample_idx) for r in records),
    )


def write_trace(records: Iterable[TraceRecord], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(trace_to_csv(records))


def _records(
    prefix: str, coords: np.ndarray, samples: np.ndarray, ap_ids: Sequence[str]
) -> list[TraceRecord]:
    """Records for (N, m, K) samples at (N, 2) locations."""
    return [
        TraceRecord(f"{prefix}{i}", float(x), float(y), ap, float(samples[i, s, j]), s)
        for i, (x, y) in enumerate(coords)
        for j, ap in enumerate(ap_ids)
        for s in range(samples.shape[1])
    ]


def synthesize_trace(
    config: ExperimentConfig,
    locations: int = 41,
    samples: int = 20,
    seed: int = 0,
) -> list[TraceRecord]:
    """Simulated survey of ``locations`` grid points with ``samples`` readings per AP."""
    grid = grid_for_count(GridKind.parse(config.grid_kind), config.region(), locations, config.grid_seed)
    prepared = ExperimentRunner(config).prepare("default", config)
    rng = derive_rng(seed, "trace")
    block = prepared.model.sample(grid.coords, prepared.anchors, samples, rng)
    return _records("L", grid.coords, block, [a.id for a in prepared.anchors])


def synthesize_experiment_traces(
    config: ExperimentConfig,
    train_path: str | Path,
    eval_path: str | Path,
) -> None:
    """Write the training survey and runtime trials of a sweep-free run as traces.

    The draws reuse the streams of :class:`ExperimentRunner`, so evaluating
    the files reproduces the run's errors.
    """
    if config.sweep_name is not None:
        raise InvalidParameterError("trace synthesis needs a configuration without a sweep")
    prepared = ExperimentRunner(config).prepare("default", config)
    ap_ids = [a.id for a in prepared.anchors]
    coords = prepared.grid.coords

    training = np.vstack([
        prepared.model.sample(
            coords[i:i + 1], prepared.anchors, config.m_training,
            derive_rng(config.seed, "default", "training", i),
        )
        for i in range(len(coords))
    ])
    write_trace(_records("T", coords, training, ap_ids), train_path)

    targets, runtime = [], []
    for chunk, size in enumerate(chunk_sizes(config.trials, TRIAL_CHUNK)):
        t, s = prepared.runtime_chunk(chunk, size)
        targets.append(t)
        runtime.append(s)
    write_trace(_records("E", np.vstack(targets), np.vstack(runtime), ap_ids), eval_path)

"""Monte Carlo localization experiments.

This module drives the full simulation loop: building the training
database for each sweep value, drawing uniform targets with fresh
runtime measurements, matching them, and summarizing the errors.

Usage::

    from fpsim.harness.config import load_config
    from fpsim.harness.runner import ExperimentRunner

    runner = ExperimentRunner(load_config("experiment.yaml"), threads=4)
    result = runner.run()
    result.summary_rows()
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import shapely

from fpsim.errors import ConfigError, InvalidParameterError
from fpsim.fingerprinting.database import TrainingDatabase, build_database, sample_means
from fpsim.fingerprinting.matcher import knn_positions
from fpsim.fingerprinting.stats import STATS_COLUMNS, ErrorStats, error_stats
from fpsim.geometry.base import Region, TrainingGrid
from fpsim.geometry.labelmap import raster_centers
from fpsim.placement.planner import place_new_anchors
from fpsim.propagation.base import Anchor, RssModel
from fpsim.rng import chunk_sizes, derive_rng, parallel_map
from .config import ExperimentConfig

logger = logging.getLogger(__name__)

TRIAL_CHUNK = 512
MAX_REDRAW_ROUNDS = 1000
SPATIAL_CHUNK = 64
SUMMARY_HEADER = ("sweep_value",) + STATS_COLUMNS
RAW_HEADER = ("sweep_value", "trial", "x", "y", "error")
SPATIAL_HEADER = ("x", "y", "mean_error")


@dataclass(frozen=True)
class PreparedRun:
    """Everything one sweep value needs before trials start."""
    label: str
    config: ExperimentConfig
    region: Region
    anchors: tuple[Anchor, ...]
    model: RssModel
    grid: TrainingGrid
    db: TrainingDatabase
    walls: Any = None

    def draw_targets(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Uniform targets, redrawn while they fall within the wall margin."""
        targets = self.region.sample_uniform(rng, n)
        if self.walls is None:
            return targets
        margin = self.config.wall_margin
        bad = shapely.dwithin(shapely.points(targets), self.walls, margin)
        for _ in range(MAX_REDRAW_ROUNDS):
            if not bad.any():
                return targets
            targets[bad] = self.region.sample_uniform(rng, int(bad.sum()))
            bad = shapely.dwithin(shapely.points(targets), self.walls, margin)
        if bad.any():
            raise InvalidParameterError(
                f"{int(bad.sum())} targets still within {margin} m of a wall after {MAX_REDRAW_ROUNDS} redraws"
            )
        return targets

    def runtime_chunk(self, chunk: int, size: int) -> tuple[np.ndarray, np.ndarray]:
        """Targets and their (size, m', K) runtime samples for one chunk."""
        rng = derive_rng(self.config.seed, self.label, "runtime", chunk)
        targets = self.draw_targets(rng, size)
        samples = self.model.sample(targets, self.anchors, self.config.m_runtime, rng)
        return targets, samples


@dataclass
class SweepOutcome:
    label: str
    stats: ErrorStats
    targets: np.ndarray
    errors: np.ndarray


@dataclass
class ExperimentResult:
    outcomes: list[SweepOutcome] = field(default_factory=list)

    def summary_rows(self) -> list[tuple[Any, ...]]:
        return [(o.label,) + o.stats.to_row() for o in self.outcomes]

    def raw_rows(self) -> list[tuple[Any, ...]]:
        return [
            (o.label, i, float(t[0]), float(t[1]), float(e))
            for o in self.outcomes
            for i, (t, e) in enumerate(zip(o.targets, o.errors))
        ]


@dataclass
class SpatialMap:
    centers: np.ndarray
    mean_error: np.ndarray
    anchors: tuple[Anchor, ...]

    def rows(self) -> list[tuple[float, float, float]]:
        return [(float(x), float(y), float(e)) for (x, y), e in zip(self.centers, self.mean_error)]


class ExperimentRunner:
    """Run sweeps and spatial error maps for one configuration.

    Parameters
    ----------
    config:
        The experiment configuration. Its ``seed`` fixes every stream.
    threads:
        Worker threads. Results do not depend on this value.
    """

    def __init__(self, config: ExperimentConfig, threads: int = 1) -> None:
        if threads < 1:
            raise InvalidParameterError(f"threads must be >= 1, got {threads}")
        self.config = config
        self.threads = threads

    # ------------------------------------------------------------------
    # Setup
    # ------------------------------------------------------------------

    def prepare(self, label: str, config: ExperimentConfig) -> PreparedRun:
        """Build anchors, model, grid and training database for one sweep value.

        Parameters
        ----------
        label:
            Sweep value label; it keys every random stream of the run.
        config:
            The configuration with the sweep value applied.

        Returns
        -------
        PreparedRun
        """
        region = config.region()
        anchors = config.base_anchors()
        request = config.placement_request()
        if request is not None:
            method, count = request
            plan = place_new_anchors(anchors, region, count, method, config.placement_seed)
            anchors = plan.anchors(config.tx_power)
        model = config.rss_model()
        grid = config.grid()
        if config.k > len(grid):
            raise InvalidParameterError(f"matcher.k={config.k} exceeds the {len(grid)}-point grid")
        db = build_database(
            grid, anchors, model, config.m_training, config.seed, stream=(label,), threads=self.threads
        )
        walls = None
        if config.exclude_walls:
            segments = config.floorplan().segments()
            if len(segments):
                walls = shapely.multilinestrings(segments)
                free = region.as_polygon().difference(shapely.buffer(walls, config.wall_margin))
                if free.area <= 0:
                    raise ConfigError(
                        f"a {config.wall_margin} m margin around the walls covers the whole region",
                        key="targets.wall_margin",
                    )
            else:
                logger.warning("targets.exclude_walls is set but the floor plan has no walls")
        return PreparedRun(label, config, region, tuple(anchors), model, grid, db, walls)

    # ------------------------------------------------------------------
    # Trials
    # ------------------------------------------------------------------

    def run_prepared(self, prepared: PreparedRun) -> SweepOutcome:
        cfg = prepared.config
        sizes = chunk_sizes(cfg.trials, TRIAL_CHUNK)

        def run_chunk(chunk: int) -> tuple[np.ndarray, np.ndarray]:
            targets, samples = prepared.runtime_chunk(chunk, sizes[chunk])
            estimates = knn_positions(prepared.db, sample_means(samples), cfg.k, cfg.weighted)
            return targets, np.hypot(*(estimates - targets).T)

        parts = parallel_map(run_chunk, range(len(sizes)), self.threads)
        targets = np.vstack([p[0] for p in parts])
        errors = np.concatenate([p[1] for p in parts])
        stats = error_stats(errors)
        logger.info(
            "sweep %s: %d trials, median %.3f m, mean %.3f m",
            prepared.label, stats.count, stats.median, stats.mean,
        )
        return SweepOutcome(prepared.label, stats, targets, errors)

    def run(self) -> ExperimentResult:
        """Run every sweep value in order.

        Returns
        -------
        ExperimentResult
            One outcome per sweep value (a single ``default`` one without a sweep).
        """
        result = ExperimentResult()
        for label, config in self.config.sweep():
            result.outcomes.append(self.run_prepared(self.prepare(label, config)))
        return result

    # ------------------------------------------------------------------
    # Spatial error map
    # ------------------------------------------------------------------

    def spatial_map(self, resolution: float) -> SpatialMap:
        """Mean error at every raster cell center over ``spatial.trials`` trials.

        Parameters
        ----------
        resolution:
            Raster cell size in meters.

        Returns
        -------
        SpatialMap
        """
        cfg = self.config
        if cfg.sweep_name is not None:
            logger.warning("spatial map ignores sweep '%s'", cfg.sweep_name)
        prepared = self.prepare("spatial", cfg)
        if cfg.spatial_anchor_count is not None:
            if cfg.spatial_anchor_count > len(prepared.anchors):
                raise InvalidParameterError(
                    f"spatial.anchor_count={cfg.spatial_anchor_count} exceeds {len(prepared.anchors)} anchors"
                )
            prepared = self._with_anchor_subset(prepared, cfg.spatial_anchor_count)
        centers = raster_centers(prepared.region, resolution)
        trials = cfg.spatial_trials
        starts = range(0, len(centers), SPATIAL_CHUNK)

        def run_chunk(chunk: int) -> np.ndarray:
            block = centers[starts[chunk]:starts[chunk] + SPATIAL_CHUNK]
            targets = np.repeat(block, trials, axis=0)
            rng = derive_rng(cfg.seed, "spatial", chunk)
            samples = prepared.model.sample(targets, prepared.anchors, cfg.m_runtime, rng)
            estimates = knn_positions(prepared.db, sample_means(samples), cfg.k, cfg.weighted)
            errors = np.hypot(*(estimates - targets).T)
            return errors.reshape(len(block), trials).mean(axis=1)

        means = np.concatenate(parallel_map(run_chunk, range(len(starts)), self.threads))
        logger.info("spatial map: %d cells, %d trials each", len(centers), trials)
        return SpatialMap(centers, means, prepared.anchors)

    def _with_anchor_subset(self, prepared: PreparedRun, count: int) -> PreparedRun:
        cfg = prepared.config
        anchors = prepared.anchors[:count]
        db = build_database(
            prepared.grid, anchors, prepared.model, cfg.m_training, cfg.seed,
            stream=("spatial", count), threads=self.threads,
        )
        return PreparedRun(
            prepared.label, cfg, prepared.region, anchors, prepared.model, prepared.grid, db, prepared.walls
        )


def run_experiment(config: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Convenience wrapper around :meth:`ExperimentRunner.run`."""
    return ExperimentRunner(config, threads).run()


def run_spatial_map(config: ExperimentConfig, resolution: float, threads: int = 1) -> SpatialMap:
    """Convenience wrapper around :meth:`ExperimentRunner.spatial_map`."""
    return ExperimentRunner(config, threads).spatial_map(resolution)

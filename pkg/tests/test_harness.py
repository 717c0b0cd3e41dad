"""Tests for experiment configs, the simulation runner and measurement traces."""

import dataclasses
import tempfile
from pathlib import Path

import numpy as np
import pytest
import shapely

from fpsim.errors import ConfigError, DuplicateKeyError, InvalidParameterError, TraceParseError
from fpsim.geometry.base import GridKind
from fpsim.harness.config import ExperimentConfig, load_config, save_config
from fpsim.harness.runner import ExperimentRunner, run_experiment, run_spatial_map
from fpsim.harness.traces import (
    ALL_MISSING_FLAG,
    evaluate_on_trace,
    ingest_trace,
    parse_trace,
    synthesize_experiment_traces,
    synthesize_trace,
    write_trace,
)

SMALL = ExperimentConfig(grid_spacing=6.0, trials=600, seed=11)
EXAMPLES = Path(__file__).resolve().parents[1] / "example"

TRACE = """loc_id,x,y,ap_id,rss_dbm,sample_idx
A,0,0,AP1,-40,0
A,0,0,AP1,-42,1
A,0,0,AP2,-70,0
B,10,0,AP1,-60,0
B,10,0,AP2,-50,0
C,20,0,AP2,,
"""


def write(tmpdir: str, name: str, text: str) -> Path:
    path = Path(tmpdir) / name
    path.write_text(text)
    return path


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


class TestConfig:
    def test_defaults(self):
        config = load_config(None)
        assert config == ExperimentConfig()
        assert config.model == "cost231"
        assert config.trials == 10_000

    def test_yaml_file(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = write(tmpdir, "exp.yaml", "grid.kind: square\nmatcher.k: 5\nrun.seed: 3\n")
            config = load_config(path)
        assert config.grid_kind == "square"
        assert config.k == 5
        assert config.seed == 3
        assert config.base_dir == tmpdir

    def test_overrides(self):
        config = load_config(None, seed=9, trials=None)
        assert config.seed == 9
        assert config.trials == 10_000

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="matcher.kk"):
            ExperimentConfig.from_mapping({"matcher.kk": 3})

    def test_nested_mapping(self):
        with pytest.raises(ConfigError, match="dotted keys"):
            ExperimentConfig.from_mapping({"grid": {"kind": "square"}})

    @pytest.mark.parametrize("key,value", [
        ("matcher.k", 0),
        ("propagation.sigma", -1),
        ("grid.kind", "surveyed"),
        ("matcher.weighted", "maybe"),
        ("placement.added", "voronoi"),
        ("run.trials", 2.5),
    ])
    def test_bad_values(self, key, value):
        with pytest.raises(ConfigError, match=key):
            ExperimentConfig.from_mapping({key: value})

    def test_sweep_not_allowed(self):
        with pytest.raises(ConfigError, match="cannot be swept"):
            ExperimentConfig.from_mapping({"sweep.name": "run.seed", "sweep.values": [1, 2]})

    def test_sweep_needs_values(self):
        with pytest.raises(ConfigError, match="non-empty"):
            ExperimentConfig.from_mapping({"sweep.name": "matcher.k"})

    def test_values_without_name(self):
        with pytest.raises(ConfigError, match="without sweep.name"):
            ExperimentConfig.from_mapping({"sweep.values": [1, 2]})

    def test_bad_sweep_value(self):
        with pytest.raises(ConfigError, match="matcher.k"):
            ExperimentConfig.from_mapping({"sweep.name": "matcher.k", "sweep.values": [1, 0]})

    def test_random_grid_needs_count(self):
        with pytest.raises(ConfigError, match="grid.count"):
            ExperimentConfig.from_mapping({"grid.kind": "random"})

    def test_missing_anchor_file(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            with pytest.raises(ConfigError, match="anchors.file"):
                ExperimentConfig.from_mapping({"anchors.file": "nope.csv"}, base_dir=tmpdir)

    def test_missing_config_file(self):
        with pytest.raises(ConfigError, match="not found"):
            load_config("/nonexistent/exp.yaml")

    def test_not_a_mapping(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = write(tmpdir, "exp.yaml", "- 1\n- 2\n")
            with pytest.raises(ConfigError, match="mapping"):
                load_config(path)

    def test_both_measurements(self):
        config = ExperimentConfig().with_value("measurements.both", 4)
        assert (config.m_training, config.m_runtime) == (4, 4)

    def test_sweep_labels(self):
        config = ExperimentConfig.from_mapping({"sweep.name": "grid.spacing", "sweep.values": "2, 3.5"})
        labels = [label for label, _ in config.sweep()]
        assert labels == ["2", "3.5"]
        assert [c.grid_spacing for _, c in config.sweep()] == [2.0, 3.5]

    def test_no_sweep_is_default(self):
        assert [label for label, _ in ExperimentConfig().sweep()] == ["default"]

    def test_save_and_load(self):
        config = ExperimentConfig.from_mapping({
            "grid.kind": "square",
            "placement.added": "random:2",
            "sweep.name": "matcher.k",
            "sweep.values": [1, 3],
        })
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "out" / "exp.yaml"
            save_config(config, path)
            assert load_config(path) == config

    def test_grid_kind_sweep_with_random_needs_count(self):
        with pytest.raises(ConfigError, match="grid.count.*random"):
            ExperimentConfig.from_mapping({"sweep.name": "grid.kind", "sweep.values": ["hex", "square", "random"]})

    def test_grid_kind_sweep_builds_each_kind(self):
        config = ExperimentConfig.from_mapping({
            "grid.count": 40,
            "sweep.name": "grid.kind",
            "sweep.values": ["hex", "square", "random"],
        })
        kinds = {label: c.grid().kind for label, c in config.sweep()}
        assert kinds == {"hex": GridKind.HEXAGONAL, "square": GridKind.SQUARE, "random": GridKind.RANDOM}

    def test_random_grid_without_count_is_refused(self):
        with pytest.raises(ConfigError, match="grid.count"):
            ExperimentConfig(grid_kind="random").grid()

    def test_grid_from_count(self):
        config = ExperimentConfig(grid_kind="square", grid_count=40)
        assert len(config.grid()) == 40
        assert config.grid().kind == GridKind.SQUARE


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------


class TestRunner:
    def test_summary(self):
        result = run_experiment(SMALL)
        rows = result.summary_rows()
        assert len(rows) == 1
        label, lo, q25, median, q75, hi, mean, count = rows[0]
        assert label == "default"
        assert count == 600
        assert 0 <= lo <= q25 <= median <= q75 <= hi
        assert len(result.raw_rows()) == 600

    def test_deterministic(self):
        a = run_experiment(SMALL).outcomes[0]
        b = run_experiment(SMALL).outcomes[0]
        assert np.array_equal(a.errors, b.errors)

    def test_thread_count_does_not_change_result(self):
        a = run_experiment(SMALL, threads=1).outcomes[0]
        b = run_experiment(SMALL, threads=3).outcomes[0]
        assert np.array_equal(a.targets, b.targets)
        assert np.array_equal(a.errors, b.errors)

    def test_seed_changes_result(self):
        a = run_experiment(SMALL).outcomes[0]
        b = run_experiment(ExperimentConfig(grid_spacing=6.0, trials=600, seed=12)).outcomes[0]
        assert not np.array_equal(a.errors, b.errors)

    def test_sweep(self):
        config = SMALL.with_value("sweep.name", "measurements.both").with_value("sweep.values", [1, 4])
        result = run_experiment(config)
        assert [o.label for o in result.outcomes] == ["1", "4"]
        assert result.outcomes[1].stats.mean < result.outcomes[0].stats.mean

    def test_k_exceeds_grid(self):
        config = ExperimentConfig(grid_spacing=10.0, k=50, trials=10)
        with pytest.raises(InvalidParameterError, match="exceeds"):
            run_experiment(config)

    def test_targets_avoid_walls(self):
        config = ExperimentConfig(grid_spacing=6.0, trials=300, exclude_walls=True, wall_margin=0.5)
        runner = ExperimentRunner(config)
        prepared = runner.prepare("default", config)
        targets = runner.run_prepared(prepared).targets
        walls = shapely.multilinestrings(config.floorplan().segments())
        assert (shapely.distance(shapely.points(targets), walls) >= 0.5).all()

    def test_placement_adds_anchors(self):
        config = ExperimentConfig(grid_spacing=6.0, trials=10, placement="voronoi:2")
        prepared = ExperimentRunner(config).prepare("default", config)
        assert len(prepared.anchors) == 6
        assert prepared.db.n_anchors == 6

    def test_wall_margin_covering_region(self):
        config = ExperimentConfig(grid_spacing=6.0, trials=10, exclude_walls=True, wall_margin=6.0)
        with pytest.raises(ConfigError, match="targets.wall_margin"):
            run_experiment(config)

    def test_target_redraws_are_bounded(self, monkeypatch):
        monkeypatch.setattr("fpsim.harness.runner.MAX_REDRAW_ROUNDS", 1)
        config = ExperimentConfig(grid_spacing=6.0, trials=300, exclude_walls=True, wall_margin=2.0)
        with pytest.raises(InvalidParameterError, match="after 1 redraws"):
            run_experiment(config)

    def test_placement_sweep_example(self):
        config = load_config(EXAMPLES / "sweep_placement.yaml", trials=20)
        runner = ExperimentRunner(config)
        counts = {label: len(runner.prepare(label, c).anchors) for label, c in config.sweep()}
        assert counts == {"none": 4, "voronoi:2": 6, "voronoi:6": 10, "random:2": 6, "random:6": 10}

    def test_threads_must_be_positive(self):
        with pytest.raises(InvalidParameterError, match="threads"):
            ExperimentRunner(SMALL, threads=0)


class TestSpatialMap:
    CONFIG = ExperimentConfig(grid_spacing=6.0, spatial_trials=5, seed=2)

    def test_cells(self):
        result = run_spatial_map(self.CONFIG, resolution=3.0)
        assert result.centers.shape == (60, 2)
        assert result.mean_error.shape == (60,)
        assert (result.mean_error >= 0).all()
        assert len(result.rows()) == 60

    def test_thread_count_does_not_change_result(self):
        a = run_spatial_map(self.CONFIG, resolution=1.0, threads=1)
        b = run_spatial_map(self.CONFIG, resolution=1.0, threads=4)
        assert np.array_equal(a.mean_error, b.mean_error)

    def test_anchor_subset(self):
        config = ExperimentConfig(grid_spacing=6.0, spatial_trials=5, spatial_anchor_count=2)
        assert len(run_spatial_map(config, resolution=3.0).anchors) == 2

    def test_anchor_subset_too_large(self):
        config = ExperimentConfig(grid_spacing=6.0, spatial_trials=5, spatial_anchor_count=9)
        with pytest.raises(InvalidParameterError, match="anchor_count"):
            run_spatial_map(config, resolution=3.0)


# ---------------------------------------------------------------------------
# Protocol directions
# ---------------------------------------------------------------------------


def shared_stream_medians(config: ExperimentConfig, key: str, values) -> list[float]:
    """Median error per value, every value drawing targets from the same stream."""
    runner = ExperimentRunner(config)
    return [
        runner.run_prepared(runner.prepare("shared", config.with_value(key, v))).stats.median
        for v in values
    ]


class TestProtocolDirections:
    BASE = ExperimentConfig(trials=2000, seed=3)

    def test_lattices_beat_random_grid(self):
        config = dataclasses.replace(self.BASE, grid_count=40)
        hexagonal, square, random = shared_stream_medians(config, "grid.kind", ["hex", "square", "random"])
        assert hexagonal <= square + 0.1
        assert square < random

    def test_more_measurements_lower_error(self):
        medians = shared_stream_medians(self.BASE, "measurements.both", [1, 4, 16])
        assert medians[0] > medians[1] > medians[2]

    @pytest.mark.parametrize("key,low,high", [
        ("propagation.gamma", 1.5, 3.5),
        ("propagation.l_w", 2.0, 7.0),
    ])
    def test_steeper_channel_lowers_error(self, key, low, high):
        bottom, top = shared_stream_medians(self.BASE, key, [low, high])
        assert top < bottom

    def test_voronoi_placement_beats_random(self):
        wins = 0
        for seed in range(5):
            config = ExperimentConfig(trials=1000, seed=seed, placement_seed=seed)
            voronoi, random = shared_stream_medians(config, "placement.added", ["voronoi:4", "random:4"])
            wins += voronoi < random
        assert wins >= 4

    def test_ten_anchors_beat_four(self):
        config = ExperimentConfig(trials=1000, seed=1)
        four, ten = shared_stream_medians(config, "placement.added", ["none", "voronoi:6"])
        assert ten < four


# ---------------------------------------------------------------------------
# Traces
# ---------------------------------------------------------------------------


class TestParseTrace:
    def test_records(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            trace = parse_trace(write(tmpdir, "t.csv", TRACE))
        assert list(trace.locations) == ["A", "B", "C"]
        assert trace.ap_ids == ["AP1", "AP2"]
        assert trace.fingerprint("A", trace.ap_ids).per_anchor_mean.tolist() == [-41.0, -70.0]
        assert trace.fingerprint("C", trace.ap_ids).all_missing

    def test_duplicate_sample(self):
        text = TRACE + "A,0,0,AP1,-41,1\n"
        with tempfile.TemporaryDirectory() as tmpdir:
            with pytest.raises(DuplicateKeyError, match=":8:"):
                parse_trace(write(tmpdir, "t.csv", text))

    def test_location_moves(self):
        text = TRACE + "A,1,0,AP2,-41,1\n"
        with tempfile.TemporaryDirectory() as tmpdir:
            with pytest.raises(TraceParseError, match="two positions"):
                parse_trace(write(tmpdir, "t.csv", text))

    def test_bad_number(self):
        text = TRACE.replace("B,10,0,AP1,-60,0", "B,10,0,AP1,loud,0")
        with tempfile.TemporaryDirectory() as tmpdir:
            with pytest.raises(TraceParseError, match="line 5|:5:"):
                parse_trace(write(tmpdir, "t.csv", text))

    def test_missing_column(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            with pytest.raises(TraceParseError, match="missing column"):
                parse_trace(write(tmpdir, "t.csv", "loc_id,x,y,ap_id\nA,0,0,AP1\n"))

    def test_no_records(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            with pytest.raises(TraceParseError, match="no records"):
                parse_trace(write(tmpdir, "t.csv", TRACE.splitlines()[0] + "\n"))

    def test_missing_file(self):
        with pytest.raises(FileNotFoundError):
            parse_trace("/nonexistent/trace.csv")


class TestTraceDatabase:
    def test_ingest(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            grid, db = ingest_trace(write(tmpdir, "t.csv", TRACE))
        assert grid.kind == GridKind.SURVEYED
        assert len(grid) == 3
        assert db.anchor_ids == ("AP1", "AP2")
        assert db.fingerprints[2].all_missing

    def test_evaluate(self):
        evaluation = """loc_id,x,y,ap_id,rss_dbm,sample_idx
Q1,1,0,AP1,-41,0
Q1,1,0,AP2,-69,0
Q2,9,0,AP3,-30,0
"""
        with tempfile.TemporaryDirectory() as tmpdir:
            train = write(tmpdir, "train.csv", TRACE)
            result = evaluate_on_trace(train, write(tmpdir, "eval.csv", evaluation), k=1)
        q1, q2 = result.rows
        assert (q1[3], q1[4]) == (0.0, 0.0)
        assert q1[5] == pytest.approx(1.0)
        assert q1[-1] == ""
        assert q2[-1] == ""
        assert result.stats.count == 2

    def test_flags_silent_location(self):
        evaluation = "loc_id,x,y,ap_id,rss_dbm,sample_idx\nQ,5,0,AP1,,\n"
        with tempfile.TemporaryDirectory() as tmpdir:
            train = write(tmpdir, "train.csv", TRACE)
            result = evaluate_on_trace(train, write(tmpdir, "eval.csv", evaluation), k=1)
        assert result.flagged == ["Q"]
        assert result.rows[0][-1] == ALL_MISSING_FLAG


class TestTraceSynthesis:
    def test_synthesized_survey(self):
        config = ExperimentConfig()
        records = synthesize_trace(config, locations=20, samples=3, seed=1)
        loc_ids = {r.loc_id for r in records}
        assert len(records) == len(loc_ids) * 3 * 4
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "survey.csv"
            write_trace(records, path)
            grid, db = ingest_trace(path)
        assert len(grid) == len(loc_ids)
        assert db.anchor_ids == ("AP1", "AP2", "AP3", "AP4")

    def test_traces_reproduce_simulation(self):
        config = ExperimentConfig(grid_spacing=6.0, trials=700, m_training=3, m_runtime=2, seed=5)
        expected = run_experiment(config).outcomes[0]
        with tempfile.TemporaryDirectory() as tmpdir:
            train, evaluation = Path(tmpdir) / "train.csv", Path(tmpdir) / "eval.csv"
            synthesize_experiment_traces(config, train, evaluation)
            result = evaluate_on_trace(train, evaluation, k=config.k, weighted=config.weighted)
        errors = np.array([row[5] for row in result.rows])
        assert np.array_equal(errors, expected.errors)
        assert result.stats == expected.stats

    def test_synthesis_rejects_sweeps(self):
        config = SMALL.with_value("sweep.name", "matcher.k").with_value("sweep.values", [1, 3])
        with tempfile.TemporaryDirectory() as tmpdir:
            with pytest.raises(InvalidParameterError, match="without a sweep"):
                synthesize_experiment_traces(config, Path(tmpdir) / "a.csv", Path(tmpdir) / "b.csv")

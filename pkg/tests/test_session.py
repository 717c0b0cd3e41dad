"""Tests for the run log."""

import dataclasses
import tempfile
from pathlib import Path

from fpsim.harness.config import ExperimentConfig
from fpsim.session.log import RunLog, parse_entry


class TestRunLog:
    def test_append_and_read(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            log = RunLog(tmpdir)
            log.append("simulate", "hello world")
            entries = log.read()
            assert len(entries) == 1
            assert "hello world" in entries[0]
            assert "[simulate]" in entries[0]
            assert (Path(tmpdir) / ".fpsim" / "log").exists()

    def test_read_empty(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            log = RunLog(tmpdir)
            assert log.read() == []
            assert log.entries() == []

    def test_read_last_n(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            log = RunLog(tmpdir)
            for i in range(10):
                log.append("exponent", f"message {i}")
            entries = log.read(last_n=3)
            assert len(entries) == 3
            assert "message 9" in entries[-1]

    def test_record_skips_unset_fields(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            log = RunLog(tmpdir)
            log.record("simulate", seed=4, trials=100, out=None)
            entry = log.read()[0]
            assert entry.endswith("[simulate] seed=4 trials=100")

    def test_custom_log_dir(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            log = RunLog(log_dir=str(Path(tmpdir) / "logs"))
            log.append("spatial-map", "done")
            assert (Path(tmpdir) / "logs" / "log").read_text().strip().endswith("done")

    def test_record_run_leads_with_seed_and_digest(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            log = RunLog(tmpdir)
            config = ExperimentConfig(seed=7)
            log.record_run("simulate", config, trials=100)
            entry = log.entries()[0]
            assert entry.seed == 7
            assert entry.digest == config.digest()
            assert log.read()[0].endswith(f"seed=7 digest={config.digest()} trials=100")

    def test_runs_of_matches_digest_across_seeds(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            log = RunLog(tmpdir)
            base = ExperimentConfig(trials=100)
            log.record_run("simulate", base)
            log.record_run("spatial-map", dataclasses.replace(base, seed=3))
            log.record_run("simulate", dataclasses.replace(base, trials=50))
            log.append("exponent", "seed=0")
            assert [e.command for e in log.runs_of(base)] == ["simulate", "spatial-map"]
            assert [e.seed for e in log.entries("simulate")] == [0, 0]


class TestConfigDigest:
    def test_ignores_seed(self):
        assert ExperimentConfig(seed=1).digest() == ExperimentConfig(seed=2).digest()

    def test_tracks_other_values(self):
        base = ExperimentConfig()
        assert base.digest() != base.with_value("propagation.sigma", 4.0).digest()
        assert base.digest() != base.with_value("grid.spacing", 6.0).digest()

    def test_ignores_key_order(self):
        a = ExperimentConfig.from_mapping({"grid.spacing": 6.0, "run.trials": 10})
        b = ExperimentConfig.from_mapping({"run.trials": 10, "grid.spacing": 6.0})
        assert a.digest() == b.digest()


class TestParseEntry:
    def test_fields(self):
        entry = parse_entry("2026-01-02 03:04 [place-anchors] seed=1 digest=abc count=2")
        assert entry is not None
        assert entry.timestamp == "2026-01-02 03:04"
        assert entry.command == "place-anchors"
        assert entry.fields == {"seed": "1", "digest": "abc", "count": "2"}

    def test_bare_message(self):
        entry = parse_entry("2026-01-02 03:04 [simulate] hello")
        assert entry is not None
        assert entry.fields == {}
        assert entry.seed is None

    def test_foreign_line(self):
        assert parse_entry("not a log line") is None

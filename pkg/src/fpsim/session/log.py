"""Append-only run log (.fpsim/log).

Each line is ``<timestamp> [<command>] key=value ...``. Runs driven by an
experiment configuration carry its seed and digest, so runs of the same
configuration can be found again and reproduced.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import TYPE_CHECKING, Any, Optional

if TYPE_CHECKING:
    from fpsim.harness.config import ExperimentConfig

_LINE = re.compile(r"^(?P<stamp>\S+ \S+) \[(?P<command>[^\]]+)\] ?(?P<rest>.*)$")


@dataclass(frozen=True)
class RunEntry:
    timestamp: str
    command: str
    fields: dict[str, str] = field(default_factory=dict)

    @property
    def seed(self) -> Optional[int]:
        value = self.fields.get("seed")
        return None if value is None else int(value)

    @property
    def digest(self) -> Optional[str]:
        return self.fields.get("digest")


def parse_entry(line: str) -> Optional[RunEntry]:
    """Parse one log line; ``None`` for lines not written by :class:`RunLog`."""
    match = _LINE.match(line.strip())
    if match is None:
        return None
    fields = dict(part.split("=", 1) for part in match["rest"].split() if "=" in part)
    return RunEntry(match["stamp"], match["command"], fields)


class RunLog:
    """One line per CLI invocation: command, seed, config digest and outputs."""

    def __init__(self, project_dir: str = ".", log_dir: str | None = None):
        if log_dir:
            self.log_path = Path(log_dir) / "log"
        else:
            self.log_path = Path(project_dir) / ".fpsim" / "log"

    def append(self, command: str, message: str) -> None:
        timestamp = datetime.now().strftime("%Y-%m-%d %H:%M")
        self.log_path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.log_path, "a") as f:
            f.write(f"{timestamp} [{command}] {message}\n")

    def record(self, command: str, **fields: Any) -> None:
        """Append ``key=value`` pairs, skipping unset ones."""
        parts = [f"{k}={v}" for k, v in fields.items() if v is not None]
        self.append(command, " ".join(parts))

    def record_run(self, command: str, config: ExperimentConfig, /, **fields: Any) -> None:
        """Record a configuration-driven run with its seed and digest first."""
        self.record(command, seed=config.seed, digest=config.digest(), **fields)

    def read(self, last_n: int = 20) -> list[str]:
        """Most recent entries, oldest first."""
        if not self.log_path.exists():
            return []
        with open(self.log_path) as f:
            lines = f.readlines()
        return [line.strip() for line in lines[-last_n:]]

    def entries(self, command: str | None = None) -> list[RunEntry]:
        """Every parsed entry, oldest first, optionally for one command."""
        if not self.log_path.exists():
            return []
        parsed = (parse_entry(line) for line in self.log_path.read_text().splitlines())
        return [e for e in parsed if e is not None and (command is None or e.command == command)]

    def runs_of(self, config: ExperimentConfig) -> list[RunEntry]:
        """Entries recorded for configurations with the same digest as ``config``."""
        digest = config.digest()
        return [e for e in self.entries() if e.digest == digest]

"""Line-numbered CSV reading for grids, anchors, floor plans and traces."""

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

from fpsim.errors import TraceParseError


@dataclass
class CsvRow:
    """One data row with its 1-based physical line number."""
    line: int
    values: dict[str, str]

    def text(self, column: str) -> str:
        return self.values.get(column, "").strip()

    def number(self, column: str, *, allow_empty: bool = False) -> float | None:
        raw = self.text(column)
        if raw == "" and allow_empty:
            return None
        try:
            value = float(raw)
        except ValueError:
            raise TraceParseError(f"column '{column}' is not a number: {raw!r}", line=self.line) from None
        if value != value or value in (float("inf"), float("-inf")):
            raise TraceParseError(f"column '{column}' must be finite, got {raw!r}", line=self.line)
        return value

    def integer(self, column: str) -> int:
        raw = self.text(column)
        try:
            return int(raw)
        except ValueError:
            raise TraceParseError(f"column '{column}' is not an integer: {raw!r}", line=self.line) from None


def read_rows(
    path: str | Path,
    required: Sequence[str],
    optional: Sequence[str] = (),
) -> Iterator[CsvRow]:
    """Yield rows of a headed CSV file, validating the header first.

    Blank lines are skipped. A row with more cells than header columns is
    malformed; missing trailing optional cells are allowed.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")

    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if not header:
            raise TraceParseError("empty file, expected a header row", line=1, path=str(path))
        header = [h.strip() for h in header]
        missing = [c for c in required if c not in header]
        if missing:
            raise TraceParseError(
                f"missing column(s) {', '.join(missing)}; header is {','.join(header)}",
                line=1,
                path=str(path),
            )
        n_required = max(header.index(c) for c in required) + 1
        for cells in reader:
            line = reader.line_num
            if not any(c.strip() for c in cells):
                continue
            if len(cells) > len(header) or len(cells) < n_required:
                raise TraceParseError(
                    f"expected {len(header)} columns, got {len(cells)}", line=line, path=str(path)
                )
            values = dict(zip(header, cells))
            for col in optional:
                values.setdefault(col, "")
            yield CsvRow(line=line, values=values)

"""CSV serialization of training grids and label maps."""

from pathlib import Path

import numpy as np

from fpsim.errors import TraceParseError
from fpsim.output.csvio import read_rows
from fpsim.output.formatter import format_csv
from .base import GridKind, Region, TrainingGrid
from .labelmap import LabelMap

GRID_HEADER = ("index", "x", "y")
LABELMAP_HEADER = ("ix", "iy", "label")


def save_grid(grid: TrainingGrid, path: str | Path) -> None:
    Path(path).write_text(format_csv(GRID_HEADER, ((i, p.x, p.y) for i, p in enumerate(grid.points))))


def load_grid(path: str | Path, kind: GridKind = GridKind.SURVEYED, spacing: float = 0.0) -> TrainingGrid:
    """Read ``index,x,y`` rows; points are ordered by index."""
    entries: dict[int, tuple[float, float]] = {}
    for row in read_rows(path, GRID_HEADER):
        index = row.integer("index")
        if index in entries:
            raise TraceParseError(f"duplicate grid index {index}", line=row.line, path=str(path))
        entries[index] = (row.number("x"), row.number("y"))  # type: ignore[assignment]
    if not entries:
        raise TraceParseError("grid file has no points", path=str(path))
    coords = np.array([entries[i] for i in sorted(entries)], dtype=float)
    return TrainingGrid.from_array(coords, kind, spacing)


def save_labelmap(labelmap: LabelMap, path: str | Path) -> None:
    ny, nx = labelmap.labels.shape
    Path(path).write_text(format_csv(
        LABELMAP_HEADER,
        ((ix, iy, int(labelmap.labels[iy, ix])) for iy in range(ny) for ix in range(nx)),
    ))


def load_labelmap(path: str | Path, region: Region, resolution: float) -> LabelMap:
    rows = [(r.integer("ix"), r.integer("iy"), r.integer("label")) for r in read_rows(path, LABELMAP_HEADER)]
    if not rows:
        raise TraceParseError("label map file has no cells", path=str(path))
    arr = np.array(rows, dtype=np.int64)
    labels = np.full((arr[:, 1].max() + 1, arr[:, 0].max() + 1), -1, dtype=np.int64)
    labels[arr[:, 1], arr[:, 0]] = arr[:, 2]
    return LabelMap(resolution=resolution, labels=labels, region=region)

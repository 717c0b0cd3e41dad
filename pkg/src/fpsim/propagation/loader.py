"""Model selection plus anchor and floor-plan loading."""

from pathlib import Path

from fpsim.errors import InvalidParameterError, TraceParseError
from fpsim.geometry.base import Point, Region
from fpsim.output.csvio import read_rows
from fpsim.output.formatter import format_csv
from .base import AnalyticChannelParams, Anchor, ChannelKind, Cost231Params, FloorPlan, RssModel, Wall

MODEL_NAMES = ("cost231", "noisy", "fading")

# Built-in AP layout for the 30 m x 18 m office, scaled to other region sizes.
_DEFAULT_ANCHOR_FRACTIONS = ((0.10, 0.14), (0.92, 0.22), (0.20, 0.86), (0.80, 0.78))


def get_model(
    name: str,
    cost231: Cost231Params | None = None,
    plan: FloorPlan | None = None,
    alpha: float = 2.0,
    noise_floor: float = 0.0,
    quant_noise_var: float = 1e-6,
) -> RssModel:
    """Return the RSS model registered under ``name``.

    - cost231 -> Cost231Model
    - noisy   -> NoisyLinearModel
    - fading  -> FadingLinearModel
    """
    key = name.strip().lower()
    if key == "cost231":
        from .cost231 import Cost231Model
        return Cost231Model(cost231 or Cost231Params(), plan)
    elif key in ("noisy", "fading"):
        from .analytic import FadingLinearModel, NoisyLinearModel
        params = AnalyticChannelParams(
            alpha=alpha,
            noise_floor=noise_floor,
            quant_noise_var=quant_noise_var,
            model=ChannelKind(key),
        )
        return NoisyLinearModel(params) if key == "noisy" else FadingLinearModel(params)
    else:
        raise InvalidParameterError(
            f"Unsupported propagation model '{name}'. Supported: {', '.join(MODEL_NAMES)}"
        )


def load_anchors(path: str | Path) -> list[Anchor]:
    """Read anchors from CSV ``id,x,y,txpower``."""
    anchors: list[Anchor] = []
    seen: set[str] = set()
    for row in read_rows(path, ("id", "x", "y", "txpower")):
        anchor_id = row.text("id")
        if anchor_id in seen:
            raise TraceParseError(f"duplicate anchor id '{anchor_id}'", line=row.line, path=str(path))
        seen.add(anchor_id)
        anchors.append(
            Anchor(Point(row.number("x"), row.number("y")), row.number("txpower"), anchor_id)  # type: ignore[arg-type]
        )
    if not anchors:
        raise TraceParseError("anchors file lists no anchors", path=str(path))
    return anchors


def save_anchors(anchors: list[Anchor], path: str | Path) -> None:
    rows = ((a.id, a.location.x, a.location.y, a.tx_power) for a in anchors)
    Path(path).write_text(format_csv(("id", "x", "y", "txpower"), rows))


def load_floorplan(path: str | Path) -> FloorPlan:
    """Read walls from CSV ``x1,y1,x2,y2[,att_db]``."""
    walls: list[Wall] = []
    for row in read_rows(path, ("x1", "y1", "x2", "y2"), optional=("att_db",)):
        start = Point(row.number("x1"), row.number("y1"))  # type: ignore[arg-type]
        end = Point(row.number("x2"), row.number("y2"))  # type: ignore[arg-type]
        if start == end:
            raise TraceParseError("wall has zero length", line=row.line, path=str(path))
        walls.append(Wall(start, end, row.number("att_db", allow_empty=True)))
    return FloorPlan(tuple(walls))


def default_anchors(region: Region, tx_power: float = 20.0) -> list[Anchor]:
    """Four APs spread asymmetrically over the region."""
    return [
        Anchor(
            Point(region.origin.x + fx * region.width, region.origin.y + fy * region.height),
            tx_power,
            f"AP{i + 1}",
        )
        for i, (fx, fy) in enumerate(_DEFAULT_ANCHOR_FRACTIONS)
    ]


def default_office_plan(region: Region) -> FloorPlan:
    """Office with three room bands split by two corridors.

    On the 30 m x 18 m default the corridors run along y in [5, 7] and
    [11, 13]; rooms are partitioned every 6 m. Other sizes scale linearly.
    """
    sx = region.width / 30.0
    sy = region.height / 18.0
    x0, y0 = region.origin.x, region.origin.y

    def pt(x: float, y: float) -> Point:
        return Point(x0 + x * sx, y0 + y * sy)

    walls = [Wall(pt(0, y), pt(30, y)) for y in (5, 7, 11, 13)]
    for lo, hi in ((0, 5), (7, 11), (13, 18)):
        walls.extend(Wall(pt(x, lo), pt(x, hi)) for x in (6, 12, 18, 24))
    return FloorPlan(tuple(walls))

"""Box-plot summaries of localization errors."""

from dataclasses import asdict, dataclass
from typing import Any, Sequence

import numpy as np

from fpsim.errors import InvalidInputError

STATS_COLUMNS = ("min", "q25", "median", "q75", "max", "mean", "trials")


@dataclass(frozen=True)
class ErrorStats:
    min: float
    q25: float
    median: float
    q75: float
    max: float
    mean: float
    count: int

    @property
    def iqr(self) -> float:
        return self.q75 - self.q25

    def to_row(self) -> tuple[float, float, float, float, float, float, int]:
        return (self.min, self.q25, self.median, self.q75, self.max, self.mean, self.count)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def error_stats(errors: Sequence[float] | np.ndarray) -> ErrorStats:
    """Min, quartiles (linear interpolation), max and mean."""
    values = np.asarray(errors, dtype=float).ravel()
    if values.size == 0:
        raise InvalidInputError("error_stats needs at least one value")
    q25, median, q75 = np.percentile(values, [25, 50, 75], method="linear")
    return ErrorStats(
        min=float(values.min()),
        q25=float(q25),
        median=float(median),
        q75=float(q75),
        max=float(values.max()),
        mean=float(values.mean()),
        count=int(values.size),
    )
